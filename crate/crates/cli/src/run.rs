//! Experiment dispatch: a validated config in, a report (plus optional CSV
//! table) out. Violations of exact identities are reported and flagged
//! rather than silently absorbed.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use trace_forms_core::body::Body;
use trace_forms_core::combinat::binomial;
use trace_forms_core::exterior::{char_poly_coeffs, lambda_k_minors};
use trace_forms_core::grassmann::eberlein_lambda;
use trace_forms_core::groups::{
    check_2design, cyclic_group, dihedral_group, hyperoctahedral, icosahedral_group,
    induced_action, octahedral_group, tetrahedral_group, GroupSpec, DESIGN_TOL,
};
use trace_forms_core::harmonics::{
    alpha_cone_derivative, extrapolate_matrices, first_variation_closed_form,
};
use trace_forms_core::isotropy::{discrete_trace, isotropy_report, trace_average};
use trace_forms_core::measures::MeasureSpec;
use trace_forms_core::quadrature::sphere_rule;
use trace_forms_core::smooth::SmoothSupportBody;

use crate::config::{sphere_function, ExperimentConfig, ExperimentKind, MeasureConfig};
use crate::parallel::parallel_map;
use crate::report::{build_report, matrix_json, CsvTable, Report};
use crate::{repro, CliError, Result};

pub struct RunOutput {
    pub report: Report,
    pub csv: Option<CsvTable>,
    /// Set when an exact identity failed its tolerance; the report is still
    /// emitted, and the process exits nonzero.
    pub violation: Option<String>,
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let (results, nodes, tolerances, csv, violation) = match &config.kind {
        ExperimentKind::Exact { n, k } => run_exact(config, *n, *k)?,
        ExperimentKind::ConeAvg { n, k } => run_avg(config, *n, *k, MeasureSpec::cone())?,
        ExperimentKind::HyperAvg { n, k } => run_avg(config, *n, *k, MeasureSpec::hypersurface())?,
        ExperimentKind::Isotropy => run_isotropy(config)?,
        ExperimentKind::Discrete => run_discrete(config)?,
        ExperimentKind::DesignCheck { group, k, all_k, trials } => {
            run_design(config, group, *k, *all_k, *trials)?
        }
        ExperimentKind::Grassmann { n, k, samples } => run_grassmann(config, *n, *k, *samples)?,
        ExperimentKind::Perturb { g, ladder } => run_perturb(config, g, ladder)?,
        ExperimentKind::AlphaScan { g, alphas, ladder } => run_alpha_scan(config, g, alphas, ladder)?,
        ExperimentKind::Repro { case } => repro::run_case(case)?,
    };
    let report = build_report(config, config.seed, nodes, tolerances, results)?;
    Ok(RunOutput { report, csv, violation })
}

type KindOutput = (Value, Option<u64>, Value, Option<CsvTable>, Option<String>);

fn matrix_of(config: &ExperimentConfig, dim_hint: Option<usize>) -> Result<DMatrix<f64>> {
    config
        .matrix
        .as_ref()
        .ok_or_else(|| CliError::Config("a matrix source is required".into()))?
        .load(dim_hint)
}

fn run_exact(config: &ExperimentConfig, n: Option<usize>, k: Option<usize>) -> Result<KindOutput> {
    let a = matrix_of(config, n)?;
    let dim = a.nrows();
    let traces = char_poly_coeffs(&a)?;
    let minors: Vec<f64> = (1..=dim).map(|kk| lambda_k_minors(&a, kk)).collect::<trace_forms_core::Result<_>>()?;
    let tol = 1e-10;
    let mut max_rel = 0.0_f64;
    for kk in 1..=dim {
        let dev = (traces.values[kk] - minors[kk - 1]).abs() / minors[kk - 1].abs().max(1.0);
        max_rel = max_rel.max(dev);
    }
    let violation = (max_rel > tol).then(|| {
        format!("characteristic-polynomial and minor-sum traces disagree: rel dev {:.3e}", max_rel)
    });
    let mut results = json!({
        "dimension": dim,
        "higher_traces": traces.values,
        "minor_sums": minors,
        "max_cross_deviation_rel": max_rel,
        "matrix": matrix_json(&a),
    });
    if let Some(kk) = k {
        if kk < 1 || kk > dim {
            return Err(CliError::Config(format!("k={} is outside 1..={}", kk, dim)));
        }
        results["k"] = json!(kk);
        results["lambda_k"] = json!(minors[kk - 1]);
    }
    Ok((results, None, json!({ "cross_check_rel": tol }), None, violation))
}

fn run_avg(config: &ExperimentConfig, n: usize, k: usize, measure: MeasureSpec) -> Result<KindOutput> {
    let nk = binomial(n, k) as usize;
    let body_spec = config.body.as_ref().expect("validated");
    let body = body_spec.instantiate(Some(nk))?;
    let a = matrix_of(config, Some(n))?;
    let scheme = config
        .quadrature
        .as_ref()
        .expect("validated")
        .to_boundary_scheme(config.seed)?;
    let res = trace_average(&a, k, &body, &measure, &scheme)?;
    let tol = 1e-10;
    let allowed = tol * res.discrepancy.abs().max(1.0);
    let violation = (res.duality_gap > allowed).then(|| {
        format!("duality identity violated: gap {:.3e} > {:.3e}", res.duality_gap, allowed)
    });
    let anisotropy_max = {
        let mut t = res.t.clone();
        for i in 0..nk {
            t[(i, i)] -= 1.0;
        }
        t.amax()
    };
    let results = json!({
        "n": n,
        "k": k,
        "space_dim": res.space_dim,
        "body": body.name(),
        "measure": res.measure,
        "scheme": res.scheme,
        "estimate": res.estimate,
        "stderr": res.stderr,
        "exact": res.exact,
        "mean_coefficient": res.mean_coefficient,
        "discrepancy": res.discrepancy,
        "predicted": res.predicted,
        "duality_gap": res.duality_gap,
        "anisotropy_max": anisotropy_max,
        "t": matrix_json(&res.t),
        "matrix": matrix_json(&a),
    });
    Ok((
        results,
        Some(res.nodes as u64),
        json!({ "duality_identity_rel": tol }),
        None,
        violation,
    ))
}

fn run_isotropy(config: &ExperimentConfig) -> Result<KindOutput> {
    let body = config.body.as_ref().expect("validated").instantiate(None)?;
    let measure = config.measure.as_ref().expect("validated").to_measure()?;
    let scheme = config
        .quadrature
        .as_ref()
        .expect("validated")
        .to_boundary_scheme(config.seed)?;
    let rep = isotropy_report(&body, &measure, &scheme)?;
    let results = json!({
        "body": rep.body,
        "measure": rep.measure,
        "scheme": rep.scheme,
        "t": matrix_json(&rep.t),
        "max_defect": rep.max_defect,
        "hs_defect": rep.hs_defect,
        "asymmetry": rep.asymmetry,
        "trace_defect": rep.trace_defect,
        "randomized": rep.randomized,
    });
    Ok((results, Some(rep.nodes as u64), json!({}), None, None))
}

fn run_discrete(config: &ExperimentConfig) -> Result<KindOutput> {
    let body = config.body.as_ref().expect("validated").instantiate(None)?;
    let p = match &body {
        Body::Polytope(p) => p.clone(),
        _ => return Err(CliError::Config("the discrete formula needs a polytope body".into())),
    };
    let a = matrix_of(config, Some(p.dim))?;
    let formula = discrete_trace(&a, &p)?;
    let trace = a.trace();
    let tol = 1e-12;
    let dev = (formula - trace).abs();
    let allowed = tol * trace.abs().max(1.0);
    let violation =
        (dev > allowed).then(|| format!("centroid formula deviates from tr A by {:.3e}", dev));
    let results = json!({
        "body": p.name,
        "facets": p.facets.len(),
        "formula": formula,
        "trace": trace,
        "deviation": dev,
        "matrix": matrix_json(&a),
    });
    Ok((results, None, json!({ "match_rel": tol }), None, violation))
}

pub fn parse_group(text: &str) -> Result<GroupSpec> {
    let unknown = || CliError::Config(format!("unknown group `{}`", text));
    match text.split_once(':') {
        None => match text.trim() {
            "tetrahedral" => Ok(tetrahedral_group()),
            "octahedral" => Ok(octahedral_group()),
            "icosahedral" => Ok(icosahedral_group()),
            _ => Err(unknown()),
        },
        Some((family, arg)) => {
            let n: usize = arg.trim().parse().map_err(|_| unknown())?;
            match family.trim() {
                "hyperoctahedral" | "b" => Ok(hyperoctahedral(n)?),
                "dihedral" | "d" => Ok(dihedral_group(n)?),
                "cyclic" | "c" => Ok(cyclic_group(n)?),
                _ => Err(unknown()),
            }
        }
    }
}

fn run_design(
    config: &ExperimentConfig,
    group: &str,
    k: Option<usize>,
    all_k: bool,
    trials: usize,
) -> Result<KindOutput> {
    let group = parse_group(group)?;
    let ks: Vec<usize> = if all_k { (1..=group.dim()).collect() } else { vec![k.unwrap_or(1)] };
    let reports = parallel_map(&ks, |kk| -> Result<_> {
        let action = induced_action(&group, *kk)?;
        let seed = config.seed.map(|s| s.wrapping_add(*kk as u64)).unwrap_or(0);
        Ok(check_2design(&action, trials, seed))
    })?;
    let mut rows = Vec::new();
    let mut all_pass = true;
    let mut max_defect = 0.0_f64;
    for rep in reports {
        let rep = rep?;
        all_pass &= rep.is_design;
        max_defect = max_defect.max(rep.max_defect);
        rows.push(json!({
            "k": rep.k,
            "dim": rep.dim,
            "max_defect": rep.max_defect,
            "is_design": rep.is_design,
            "basis_checked": rep.basis_checked,
            "trials": rep.trials,
        }));
    }
    let results = json!({
        "group": group.name,
        "order": group.order(),
        "source_dim": group.dim(),
        "per_k": rows,
        "all_pass": all_pass,
        "max_defect": max_defect,
    });
    Ok((results, None, json!({ "design": DESIGN_TOL }), None, None))
}

fn run_grassmann(config: &ExperimentConfig, n: usize, k: usize, samples: u64) -> Result<KindOutput> {
    let a = matrix_of(config, Some(n))?;
    let exact = lambda_k_minors(&a, k)?;
    let seed = config.seed.expect("validated");
    let est = eberlein_lambda(&a, k, samples as usize, seed)?;
    let z = (est.estimate - exact) / est.stderr;
    let results = json!({
        "n": n,
        "k": k,
        "estimate": est.estimate,
        "stderr": est.stderr,
        "exact": exact,
        "z": z,
        "within_3_sigma": z.abs() <= 3.0,
        "matrix": matrix_json(&a),
    });
    Ok((results, Some(samples), json!({ "sigma_flag": 3.0 }), None, None))
}

fn run_perturb(config: &ExperimentConfig, g_name: &str, ladder: &[f64]) -> Result<KindOutput> {
    let (g, m) = sphere_function(g_name)?;
    let measure = config
        .measure
        .clone()
        .unwrap_or(MeasureConfig::Hypersurface)
        .to_measure()?;
    let scheme = config
        .quadrature
        .as_ref()
        .expect("validated")
        .to_sphere_scheme(config.seed)?;
    let rule = sphere_rule(m, scheme.clone())?;
    let mut slopes = Vec::new();
    let mut per_eps = Vec::new();
    for &eps in ladder {
        let body = Body::Smooth(SmoothSupportBody::new(eps, g.clone())?);
        let rep = isotropy_report(
            &body,
            &measure,
            &trace_forms_core::measures::BoundaryScheme::Sphere(scheme.clone()),
        )?;
        let slope = rep.anisotropy.clone() / eps;
        per_eps.push(json!({ "eps": eps, "slope": matrix_json(&slope) }));
        slopes.push(slope);
    }
    let extrapolated = extrapolate_matrices(ladder, &slopes)?;
    let closed = first_variation_closed_form(&g, &rule)?;
    let gap = (&extrapolated - &closed).norm();
    let rel_gap = gap / closed.norm().max(1.0);
    let tol = 1e-3;
    let mut csv_rows = Vec::new();
    for (i, &eps) in ladder.iter().enumerate() {
        let mut row = vec![eps];
        row.extend(slopes[i].iter().copied());
        csv_rows.push(row);
    }
    let mut last = vec![0.0];
    last.extend(extrapolated.iter().copied());
    csv_rows.push(last);
    let mut header = vec!["eps".to_string()];
    for j in 0..m {
        for i in 0..m {
            header.push(format!("slope_{}{}", i, j));
        }
    }
    let csv = CsvTable { header, rows: csv_rows };
    let results = json!({
        "g": g_name,
        "m": m,
        "measure": measure.describe(),
        "ladder": ladder,
        "per_eps": per_eps,
        "extrapolated": matrix_json(&extrapolated),
        "closed_form": matrix_json(&closed),
        "hs_gap": gap,
        "rel_gap": rel_gap,
        "agrees": rel_gap <= tol,
        "table": csv.to_json(),
    });
    let nodes = (rule.len() * ladder.len()) as u64;
    Ok((results, Some(nodes), json!({ "closed_form_rel": tol }), Some(csv), None))
}

fn run_alpha_scan(
    config: &ExperimentConfig,
    g_name: &str,
    alphas: &[f64],
    ladder: &[f64],
) -> Result<KindOutput> {
    let (g, m) = sphere_function(g_name)?;
    let scheme = config
        .quadrature
        .as_ref()
        .expect("validated")
        .to_sphere_scheme(config.seed)?;
    let rule_len = sphere_rule(m, scheme.clone())?.len();
    // Traceless direction the derivative is measured against.
    let mut b = DMatrix::<f64>::zeros(m, m);
    b[(0, 0)] = 1.0;
    b[(m - 1, m - 1)] = -1.0;
    let grid_tol = 1e-3;
    let cone_tol = 1e-6;
    let mut rows = Vec::new();
    let mut csv_rows = Vec::new();
    let mut all_pass = true;
    for &alpha in alphas {
        let rep = alpha_cone_derivative(&g, &b, alpha, ladder, &scheme)?;
        let tol = if alpha == 1.0 { cone_tol } else { grid_tol };
        let pass = rep.gap <= tol;
        all_pass &= pass;
        rows.push(json!({
            "alpha": alpha,
            "numeric": rep.numeric,
            "predicted": rep.predicted,
            "gap": rep.gap,
            "pass": pass,
        }));
        csv_rows.push(vec![alpha, rep.numeric, rep.predicted, rep.gap]);
    }
    let csv = CsvTable {
        header: vec!["alpha".into(), "numeric".into(), "predicted".into(), "gap".into()],
        rows: csv_rows,
    };
    let results = json!({
        "g": g_name,
        "m": m,
        "b": matrix_json(&b),
        "ladder": ladder,
        "rows": rows,
        "all_pass": all_pass,
        "table": csv.to_json(),
    });
    let nodes = (rule_len * (ladder.len() + 1) * alphas.len()) as u64;
    Ok((
        results,
        Some(nodes),
        json!({ "grid": grid_tol, "alpha_one": cone_tol }),
        Some(csv),
        None,
    ))
}
