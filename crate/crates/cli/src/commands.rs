//! Thin adapters from parsed arguments to library calls.

use std::path::Path;

use log::{debug, info};
use serde::Serialize;
use serde_json::Value;
use sphere_lp::bounds::{self, BoundReport, TestFunctionReport, WeightStats};
use sphere_lp::codes::{self, ConfigName, DesignCheckReport, WeightedCode, MOMENT_TOL};
use sphere_lp::par::Execution;
use sphere_lp::potentials::Potential;
use sphere_lp::quadrature::{QuadratureRule, MAX_DEGREE};

use crate::output::{self, csv_pairs, num, opt, text_pairs};
use crate::{
    BoundArgs, CheckArgs, CliError, CodeArgs, DesignArgs, DesignUubArgs, Format, Source, TestFunctionArgs,
    UubArgs,
};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// A built-in name, or failing that a JSON code file.
pub fn load_code(spec: &str) -> Result<WeightedCode, CliError> {
    match spec.parse::<ConfigName>() {
        Ok(name) => Ok(codes::build_config(name)?),
        Err(parse_err) if Path::new(spec).is_file() => {
            debug!("`{spec}` is not a built-in ({parse_err}); reading it as a code file");
            read_code_file(Path::new(spec))
        }
        Err(e) => Err(e.into()),
    }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_code_file(path: &Path) -> Result<WeightedCode, CliError> {
    serde_json::from_value(read_json(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// What the bound commands need from `--n/--capacity/--weights-file/--config`.
struct Resolved {
    n: usize,
    capacity: f64,
    weights: Option<Vec<f64>>,
    code: Option<WeightedCode>,
    label: Option<String>,
}

fn resolve(src: &Source) -> Result<Resolved, CliError> {
    let check_n = |from_code: usize| match src.n {
        Some(n) if n != from_code => {
            Err(usage(format!("--n {n} disagrees with the code dimension {from_code}")))
        }
        _ => Ok(from_code),
    };
    if let Some(spec) = &src.config {
        let code = load_code(spec)?;
        return Ok(Resolved {
            n: check_n(code.dimension())?,
            capacity: code.n_w(),
            weights: Some(code.weights().to_vec()),
            code: Some(code),
            label: Some(spec.clone()),
        });
    }
    if let Some(path) = &src.weights_file {
        let label = Some(path.display().to_string());
        let value = read_json(path)?;
        if value.is_array() {
            let weights: Vec<f64> =
                serde_json::from_value(value).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let n = src.n.ok_or_else(|| usage("--n is required with a bare weight array"))?;
            let stats = WeightStats::from_weights(&weights)?;
            return Ok(Resolved { n, capacity: stats.n_w, weights: Some(weights), code: None, label });
        }
        let code: WeightedCode =
            serde_json::from_value(value).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        return Ok(Resolved {
            n: check_n(code.dimension())?,
            capacity: code.n_w(),
            weights: Some(code.weights().to_vec()),
            code: Some(code),
            label,
        });
    }
    match (src.n, src.capacity) {
        (Some(n), Some(capacity)) => Ok(Resolved { n, capacity, weights: None, code: None, label: None }),
        (None, _) => Err(usage("--n is required unless --config or a code file is given")),
        (_, None) => Err(usage("one of --capacity, --weights-file or --config is required")),
    }
}

fn potential(spec: &str, n: usize) -> Result<Potential, CliError> {
    Ok(Potential::parse_with_dimension(spec, Some(n))?)
}

fn s_from(explicit: Option<f64>, r: &Resolved) -> Result<f64, CliError> {
    match (explicit, &r.code) {
        (Some(s), _) => Ok(s),
        (None, Some(code)) => Ok(code.max_inner_product()),
        (None, None) => Err(usage("--s is required unless the code points are known")),
    }
}

fn tau_from(explicit: Option<usize>, r: &Resolved) -> Result<usize, CliError> {
    match (explicit, &r.code) {
        (Some(t), _) => Ok(t),
        (None, Some(code)) => {
            let strength = codes::design_strength(code, MAX_DEGREE + 1, MOMENT_TOL)?.strength;
            info!("design strength of the code: {strength}");
            if strength == 0 {
                return Err(usage("the code is not a spherical 1-design"));
            }
            Ok(strength)
        }
        (None, None) => Err(usage("--tau is required unless the code points are known")),
    }
}

fn attach_weights(mut report: BoundReport, r: &Resolved) -> Result<BoundReport, CliError> {
    if let Some(w) = &r.weights {
        report.weights = Some(WeightStats::from_weights(w)?);
    }
    Ok(report)
}

pub fn ulb(a: &BoundArgs, fmt: Format) -> Result<String, CliError> {
    let r = resolve(&a.source)?;
    let h = potential(&a.potential, r.n)?;
    info!("ulb n={} N_W={} h={h}", r.n, r.capacity);
    let report = match &r.weights {
        Some(w) => bounds::ulb_for_weights(w, r.n, &h)?,
        None => bounds::ulb(r.n, r.capacity, &h)?,
    };
    render_bound("ulb", &report, r.label.as_deref(), fmt)
}

pub fn uub(a: &UubArgs, fmt: Format) -> Result<String, CliError> {
    let r = resolve(&a.bound.source)?;
    let h = potential(&a.bound.potential, r.n)?;
    let s = s_from(a.s, &r)?;
    info!("uub n={} N_W={} s={s} h={h}", r.n, r.capacity);
    let report = attach_weights(bounds::uub(r.n, r.capacity, s, &h, a.m_override)?, &r)?;
    render_bound("uub", &report, r.label.as_deref(), fmt)
}

pub fn design_ulb(a: &DesignArgs, fmt: Format) -> Result<String, CliError> {
    let r = resolve(&a.bound.source)?;
    let h = potential(&a.bound.potential, r.n)?;
    let tau = tau_from(a.tau, &r)?;
    let report = attach_weights(bounds::design_ulb(r.n, r.capacity, tau, &h)?, &r)?;
    render_bound("design-ulb", &report, r.label.as_deref(), fmt)
}

pub fn design_uub(a: &DesignUubArgs, fmt: Format) -> Result<String, CliError> {
    let r = resolve(&a.design.bound.source)?;
    let h = potential(&a.design.bound.potential, r.n)?;
    let tau = tau_from(a.design.tau, &r)?;
    let s = s_from(a.s, &r)?;
    let report = attach_weights(bounds::design_uub(r.n, r.capacity, s, tau, &h)?, &r)?;
    render_bound("design-uub", &report, r.label.as_deref(), fmt)
}

#[derive(Serialize)]
struct Labelled<'a, T> {
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a str>,
    #[serde(flatten)]
    report: &'a T,
}

fn rule_csv(rule: &QuadratureRule) -> String {
    let mut out = String::from("i,alpha_i,rho_i\n");
    for (i, (a, r)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        out.push_str(&format!("{i},{},{}\n", num(*a), num(*r)));
    }
    out
}

fn rule_text(rule: &QuadratureRule) -> String {
    let mut out = format!("{:>3}  {:>16}  {:>16}\n", "i", "alpha_i", "rho_i");
    for (i, (a, r)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        out.push_str(&format!("{i:>3}  {:>16}  {:>16}\n", num(*a), num(*r)));
    }
    out
}

fn render_bound(
    command: &str,
    report: &BoundReport,
    label: Option<&str>,
    fmt: Format,
) -> Result<String, CliError> {
    let out = match fmt {
        Format::Json => output::json(command, &Labelled { config: label, report })?,
        Format::Csv | Format::Text => {
            let mut pairs = vec![
                ("bound", command.to_string()),
                ("n", report.n.to_string()),
                ("m", report.m.to_string()),
                ("capacity", num(report.capacity)),
                ("s", opt(report.s)),
                ("potential", report.potential.to_string()),
                ("value", num(report.value)),
                ("lambda_star", opt(report.lambda_star)),
                ("n1", opt(report.n1)),
                ("feasible", report.feasible.to_string()),
            ];
            if let Some(l) = label {
                pairs.insert(0, ("config", l.to_string()));
            }
            if fmt == Format::Csv {
                format!("{}\n{}", rule_csv(&report.rule), csv_pairs(&pairs))
            } else {
                let mut out = text_pairs(&pairs);
                out.push('\n');
                out.push_str(&rule_text(&report.rule));
                out.push('\n');
                for c in &report.diagnostics {
                    let status = if c.passed { "ok" } else { "FAIL" };
                    let role = if c.gating { "gating" } else { "info" };
                    out.push_str(&format!("[{status}] {} ({role}): {}\n", c.name, c.detail));
                }
                out
            }
        }
    };
    if report.feasible {
        Ok(out)
    } else {
        Err(CliError::Infeasible(out))
    }
}

fn code_from(
    config: &Option<String>,
    file: &Option<std::path::PathBuf>,
) -> Result<(WeightedCode, String), CliError> {
    match (config, file) {
        (Some(spec), _) => Ok((load_code(spec)?, spec.clone())),
        (None, Some(path)) => Ok((read_code_file(path)?, path.display().to_string())),
        (None, None) => Err(usage("--config or --weights-file is required")),
    }
}

#[derive(Serialize)]
struct EnergyReport {
    config: String,
    n: usize,
    size: usize,
    n_w: f64,
    s_w: f64,
    potential: Potential,
    energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<f64>,
}

pub fn energy(a: &CodeArgs, fmt: Format) -> Result<String, CliError> {
    let (code, label) = code_from(&a.config, &a.weights_file)?;
    let h = potential(&a.potential, code.dimension())?;
    let energy = codes::energy(&code, &h, Execution::default())?;
    let closed_form =
        label.parse::<ConfigName>().ok().and_then(|name| codes::closed_form_energy(name, &h).ok());
    let r = EnergyReport {
        config: label,
        n: code.dimension(),
        size: code.len(),
        n_w: code.n_w(),
        s_w: code.s_w(),
        potential: h,
        energy,
        closed_form,
    };
    let pairs = [
        ("config", r.config.clone()),
        ("n", r.n.to_string()),
        ("size", r.size.to_string()),
        ("n_w", num(r.n_w)),
        ("potential", r.potential.to_string()),
        ("energy", num(r.energy)),
        ("closed_form", opt(r.closed_form)),
    ];
    Ok(match fmt {
        Format::Json => output::json("energy", &r)?,
        Format::Csv => csv_pairs(&pairs),
        Format::Text => text_pairs(&pairs),
    })
}

#[derive(Serialize)]
struct CheckReport<'a> {
    config: String,
    n: usize,
    size: usize,
    #[serde(flatten)]
    report: &'a DesignCheckReport,
    next_moment: Option<f64>,
}

pub fn design_check(a: &CheckArgs, fmt: Format) -> Result<String, CliError> {
    let (code, label) = code_from(&a.config, &a.weights_file)?;
    let report = codes::design_strength(&code, a.tau, a.tol)?;
    let r = CheckReport {
        config: label,
        n: code.dimension(),
        size: code.len(),
        report: &report,
        next_moment: report.next_moment(),
    };
    Ok(match fmt {
        Format::Json => output::json("design-check", &r)?,
        Format::Csv => {
            let mut out = String::from("ell,moment\n");
            for (i, m) in report.moments.iter().enumerate() {
                out.push_str(&format!("{},{}\n", i + 1, num(*m)));
            }
            out
        }
        Format::Text => {
            let mut out = text_pairs(&[
                ("config", r.config.clone()),
                ("strength", report.strength.to_string()),
                ("next_moment", opt(r.next_moment)),
                ("tol", num(report.tol)),
            ]);
            for (i, m) in report.moments.iter().enumerate() {
                out.push_str(&format!("M_{:<3} {}\n", i + 1, num(*m)));
            }
            out
        }
    })
}

pub fn test_functions(a: &TestFunctionArgs, fmt: Format) -> Result<String, CliError> {
    let report: TestFunctionReport = bounds::test_functions(a.n, a.capacity, a.jmax)?;
    let sign = |v: &bounds::TestFunctionValue| {
        serde_json::to_value(v.sign).ok().and_then(|s| s.as_str().map(str::to_string)).unwrap_or_default()
    };
    Ok(match fmt {
        Format::Json => output::json("test-functions", &report)?,
        Format::Csv => {
            let mut out = String::from("j,q_j,sign\n");
            for v in &report.values {
                out.push_str(&format!("{},{},{}\n", v.j, num(v.value), sign(v)));
            }
            out
        }
        Format::Text => {
            let mut out = text_pairs(&[
                ("n", report.n.to_string()),
                ("m", report.m.to_string()),
                ("max |Q_j|, j<=m", num(report.max_vanishing_residual)),
                ("improvable at", format!("{:?}", report.improvable_at)),
            ]);
            for v in &report.values {
                out.push_str(&format!("Q_{:<3} {:>20}  {}\n", v.j, num(v.value), sign(v)));
            }
            out
        }
    })
}
