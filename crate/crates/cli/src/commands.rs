//! The six pipelines. Each turns a loaded configuration into an
//! [`Outcome`]: contracts, results, CSV tables and extra documents.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use beltrami_core::hodge_dn::{build_operator_symbols, factorization_residual, factorize_dn};
use beltrami_core::jets::{random_metric_jet, Jet3, MetricJet, RandomJetSpec};
use beltrami_core::nt_map::{nt_normal_residual, nt_symbol, NTSymbol};
use beltrami_core::recovery::{
    boundary_table, forward_nt, normal_derivative_table, recover_first_orders_explicit,
    recover_jet_with, RecoveredJet, RecoveryOptions,
};
use beltrami_core::symbols::SymbolSeries;
use beltrami_core::{Rational, Scalar};
use beltrami_numerics::bfields::{
    asymptotic_fit, bfield_eval_with, embedding_probe, field_check, make_loop, ApproachPath,
    BundleGrid, LoopMetric, ProbeSettings,
};
use beltrami_numerics::slab::{field_residuals, solve_modes, symbol_decay_fit};

use crate::config::{LoadedConfig, MetricInput, NumericMode, SymbolInput, Tolerances};
use crate::error::CliError;
use crate::report::{Contract, Outcome, Table};

/// Scalars a symbolic pipeline can run in.
pub trait InputScalar: Scalar {
    fn metric(m: &MetricInput) -> Option<&MetricJet<Self>>;
    fn symbol(s: &SymbolInput) -> Option<&NTSymbol<Self>>;
}

impl InputScalar for Rational {
    fn metric(m: &MetricInput) -> Option<&MetricJet<Self>> {
        match m {
            MetricInput::Exact(m) => Some(m),
            MetricInput::Float(_) => None,
        }
    }

    fn symbol(s: &SymbolInput) -> Option<&NTSymbol<Self>> {
        match s {
            SymbolInput::Exact(s) => Some(s),
            SymbolInput::Float(_) => None,
        }
    }
}

impl InputScalar for f64 {
    fn metric(m: &MetricInput) -> Option<&MetricJet<Self>> {
        match m {
            MetricInput::Float(m) => Some(m),
            MetricInput::Exact(_) => None,
        }
    }

    fn symbol(s: &SymbolInput) -> Option<&NTSymbol<Self>> {
        match s {
            SymbolInput::Float(s) => Some(s),
            SymbolInput::Exact(_) => None,
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn mismatch() -> CliError {
    CliError::Internal("input parsed in a different arithmetic than the run".into())
}

fn parse_lambda<S: Scalar>(text: &str) -> Result<S, CliError> {
    S::parse_text(text).ok_or_else(|| CliError::Parse(format!("'{text}' is not a number")))
}

/// Exact runs demand an exact zero; float runs compare `measured / scale`
/// with `tol`.
fn residual_contract(
    mode: NumericMode,
    name: String,
    measured: f64,
    scale: f64,
    tol: f64,
) -> Contract {
    match mode {
        NumericMode::Exact => Contract::equals(name, measured, 0.0),
        NumericMode::Float => Contract::at_most(name, measured / scale.max(1.0), tol),
    }
}

fn input_metrics<S: InputScalar>(
    l: &LoadedConfig,
) -> Result<Vec<(String, MetricJet<S>)>, CliError> {
    let mut out = Vec::with_capacity(l.metrics.len().max(1));
    for (name, m) in &l.metrics {
        out.push((name.clone(), S::metric(m).ok_or_else(mismatch)?.clone()));
    }
    Ok(out)
}

fn degree_rows(table: &mut Table, metric: &str, kind: &str, r: &SymbolSeries<impl Scalar>) {
    for (deg, c) in r.components() {
        table.push([
            metric.to_string(),
            kind.to_string(),
            deg.to_string(),
            num(c.max_abs()),
        ]);
    }
}

/// DN factorization and NT symbol of every input metric (or the bundled
/// Euclidean jet), with both residuals.
pub fn symbols<S: InputScalar>(l: &LoadedConfig) -> Result<Outcome, CliError> {
    let sec = &l.config.symbols;
    let tol = &l.config.tolerances;
    let lambda: S = parse_lambda(&sec.lambda)?;
    let mut metrics = input_metrics::<S>(l)?;
    if metrics.is_empty() {
        metrics.push(("euclidean".into(), MetricJet::euclidean(sec.order)));
    }
    let mut out = Outcome::default();
    let mut table = Table::new("residuals", &["metric", "kind", "degree", "max_abs"]);
    let mut summary = serde_json::Map::new();
    for (name, m) in &metrics {
        let d = factorize_dn(m, &lambda, sec.bottom + 1)?;
        let ops = build_operator_symbols(m, &lambda)?;
        let fr = factorization_residual(&d, &ops)?;
        let sigma = nt_symbol(&d, sec.bottom)?;
        let nr = nt_normal_residual(&sigma, &d)?;
        degree_rows(&mut table, name, "factorization", &fr);
        degree_rows(&mut table, name, "normal", &nr);
        let scale = d.b.max_abs();
        out.contracts.push(residual_contract(
            l.mode,
            format!("factorization_residual[{name}]"),
            fr.max_abs(),
            scale,
            tol.residual,
        ));
        out.contracts.push(residual_contract(
            l.mode,
            format!("normal_residual[{name}]"),
            nr.max_abs(),
            scale,
            tol.residual,
        ));
        out.documents.push((format!("dn_{name}.json"), d.to_json()));
        out.documents
            .push((format!("nt_{name}.json"), sigma.to_json()));
        summary.insert(
            name.clone(),
            json!({
                "K": m.order(),
                "dn_bottom": d.bottom(),
                "sigma_bottom": sigma.bottom(),
                "sigma_mode": sigma.mode.as_str(),
            }),
        );
    }
    out.result("lambda", lambda.to_text());
    out.result("metrics", summary);
    out.tables.push(table);
    Ok(out)
}

/// Rank and residual contracts per stage; float residuals are taken
/// relative to `data_scale`.
fn stage_contracts<S: Scalar>(
    out: &mut Outcome,
    mode: NumericMode,
    tol: &Tolerances,
    tag: &str,
    r: &RecoveredJet<S>,
    data_scale: f64,
) {
    for s in &r.stages {
        let k = s.normal_order;
        out.contracts.push(residual_contract(
            mode,
            format!("stage_residual[{tag}:{k}]"),
            s.residual,
            data_scale,
            tol.residual,
        ));
        out.contracts.push(Contract::equals(
            format!("stage_rank[{tag}:{k}]"),
            s.rank as f64,
            s.unknowns as f64,
        ));
    }
}

fn stage_rows<S: Scalar>(table: &mut Table, tag: &str, r: &RecoveredJet<S>) {
    for s in &r.stages {
        table.push([
            tag.to_string(),
            s.normal_order.to_string(),
            s.degree.to_string(),
            s.unknowns.to_string(),
            s.equations.to_string(),
            s.rank.to_string(),
            num(s.residual),
            num(s.affinity_defect),
            s.forward_runs.to_string(),
        ]);
    }
}

const STAGE_HEADER: [&str; 9] = [
    "jet",
    "normal_order",
    "degree",
    "unknowns",
    "equations",
    "rank",
    "residual",
    "affinity_defect",
    "forward_runs",
];

/// Largest coefficient difference of two jet triples, compared at the
/// lower of their orders, with the reference's largest coefficient.
fn table_difference<S: Scalar>(got: &[Jet3<S>; 3], want: &[Jet3<S>; 3]) -> (f64, f64) {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (a, b) in got.iter().zip(want) {
        let o = a.order().min(b.order());
        diff = diff.max((&a.truncate(o) - &b.truncate(o)).max_abs());
        scale = scale.max(b.max_abs());
    }
    (diff, scale)
}

/// `∂ₙᵏ` tables of `m` at the depths a recovery of tangential order `t`
/// produces.
fn reference_table<S: Scalar>(
    m: &MetricJet<S>,
    k: usize,
    t: usize,
) -> Result<[Jet3<S>; 3], CliError> {
    let table = if k == 0 {
        boundary_table(m)
    } else {
        normal_derivative_table(m, k)?
    };
    Ok(table.map(|j| j.truncate(t - k)))
}

/// Compares every recovered table with the reference. Float differences
/// are measured against the largest coefficient of the whole reference jet.
fn compare_recovery<S: Scalar>(
    out: &mut Outcome,
    table: &mut Table,
    mode: NumericMode,
    tol: &Tolerances,
    tag: &str,
    m: &MetricJet<S>,
    r: &RecoveredJet<S>,
) -> Result<(), CliError> {
    let t = r.tangential_order;
    let mut rows = Vec::with_capacity(r.normal_derivs.len() + 1);
    for k in 0..=r.normal_derivs.len() {
        let got = r.table(k).expect("k within the recovered range");
        rows.push(table_difference(got, &reference_table(m, k, t)?));
    }
    let jet_scale = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    for (k, (diff, scale)) in rows.into_iter().enumerate() {
        table.push([tag.to_string(), k.to_string(), num(diff), num(scale)]);
        out.contracts.push(residual_contract(
            mode,
            format!("recovered_vs_reference[{tag}:{k}]"),
            diff,
            jet_scale,
            tol.relative,
        ));
    }
    Ok(())
}

/// Recovery of the boundary jet from a stored NT symbol.
pub fn recover<S: InputScalar>(l: &LoadedConfig) -> Result<Outcome, CliError> {
    let sec = &l.config.recover;
    let tol = &l.config.tolerances;
    let (name, input) = l
        .symbol
        .as_ref()
        .ok_or_else(|| CliError::Parse("'recover' needs inputs.symbol".into()))?;
    let sigma = S::symbol(input).ok_or_else(mismatch)?;
    let opts = RecoveryOptions {
        kmax: sec.kmax,
        tangential_order: sec.tangential_order,
        seed: l.config.seed,
    };
    let r = recover_jet_with(sigma, &opts)?;
    let mut out = Outcome::default();
    stage_contracts(&mut out, l.mode, tol, name, &r, sigma.sigma.max_abs());
    let mut stages = Table::new("stages", &STAGE_HEADER);
    stage_rows(&mut stages, name, &r);
    let references = input_metrics::<S>(l)?;
    if let Some((mname, m)) = references.first() {
        let mut cmp = Table::new(
            "comparison",
            &[
                "jet",
                "normal_order",
                "max_abs_difference",
                "reference_scale",
            ],
        );
        compare_recovery(&mut out, &mut cmp, l.mode, tol, mname, m, &r)?;
        out.tables.push(cmp);
    }
    out.result("lambda", r.lambda.to_text());
    out.result("tangential_order", r.tangential_order);
    out.result("depth_binding", r.depth_binding);
    out.documents
        .push((format!("recovered_{name}.json"), r.to_json()));
    out.documents.push((
        format!("recovered_metric_{name}.json"),
        r.metric_jet()?.to_json(),
    ));
    out.tables.push(stages);
    Ok(out)
}

/// Forward pipeline and recovery on input, random or bundled jets, with the
/// closed-form route as a second algorithm for orders 1 and 2.
pub fn roundtrip<S: InputScalar>(l: &LoadedConfig) -> Result<Outcome, CliError> {
    let sec = &l.config.roundtrip;
    let tol = &l.config.tolerances;
    let lambda: S = parse_lambda(&sec.lambda)?;
    let mut jets = input_metrics::<S>(l)?;
    let mut rng = ChaCha8Rng::seed_from_u64(l.config.seed);
    for j in 0..sec.random {
        let spec = RandomJetSpec {
            order: sec.order,
            ..Default::default()
        };
        jets.push((format!("random{j}"), random_metric_jet(&mut rng, spec)));
    }
    if jets.is_empty() {
        jets.push(("euclidean".into(), MetricJet::euclidean(sec.order)));
    }
    let mut out = Outcome::default();
    let mut cmp = Table::new(
        "roundtrip",
        &[
            "jet",
            "normal_order",
            "max_abs_difference",
            "reference_scale",
        ],
    );
    let mut stages = Table::new("stages", &STAGE_HEADER);
    let mut explicit_rows = Table::new("explicit", &["jet", "normal_order", "max_abs_difference"]);
    for (name, m) in &jets {
        let sigma = forward_nt(m, &lambda, -(sec.kmax as i32))?;
        let opts = RecoveryOptions {
            kmax: sec.kmax,
            tangential_order: None,
            seed: l.config.seed,
        };
        let r = recover_jet_with(&sigma, &opts)?;
        stage_contracts(&mut out, l.mode, tol, name, &r, sigma.sigma.max_abs());
        stage_rows(&mut stages, name, &r);
        compare_recovery(&mut out, &mut cmp, l.mode, tol, name, m, &r)?;
        if sec.explicit && sec.kmax >= 2 {
            let e = recover_first_orders_explicit(&sigma, r.tangential_order)?;
            for (k, got) in [(0, &e.boundary_metric), (1, &e.first), (2, &e.second)] {
                let (diff, scale) = table_difference(got, r.table(k).expect("kmax ≥ 2"));
                explicit_rows.push([name.clone(), k.to_string(), num(diff)]);
                out.contracts.push(residual_contract(
                    l.mode,
                    format!("explicit_vs_probing[{name}:{k}]"),
                    diff,
                    scale,
                    tol.relative,
                ));
            }
        }
    }
    out.result("lambda", lambda.to_text());
    out.result("kmax", sec.kmax);
    out.result(
        "jets",
        jets.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
    );
    out.tables.push(cmp);
    out.tables.push(stages);
    if !explicit_rows.rows.is_empty() {
        out.tables.push(explicit_rows);
    }
    Ok(out)
}

/// Slab solver against the symbol expansion of the same profile.
pub fn slab(l: &LoadedConfig) -> Result<Outcome, CliError> {
    let sec = &l.config.slab;
    let tol = &l.config.tolerances;
    let cfg = sec.solver_config();
    let deepest = sec.terms.iter().copied().max().unwrap_or(0);
    let sigma = forward_nt(
        &sec.profile.metric_jet(sec.order)?,
        &sec.lambda,
        -(deepest as i32),
    )?;
    let mut out = Outcome::default();

    let mut modes = Table::new(
        "modes",
        &[
            "xi1",
            "xi2",
            "xi_norm",
            "re_u1",
            "im_u1",
            "re_u2",
            "im_u2",
            "condition",
            "ode_steps",
        ],
    );
    let solved = solve_modes(&cfg)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    for s in &solved {
        modes.push([
            num(s.xi[0]),
            num(s.xi[1]),
            num(s.xi[0].hypot(s.xi[1])),
            num(s.nt_value[0].re),
            num(s.nt_value[0].im),
            num(s.nt_value[1].re),
            num(s.nt_value[1].im),
            num(s.condition),
            s.ode.accepted.to_string(),
        ]);
    }

    let mut decay = Table::new("decay", &["terms", "xi_norm", "error", "scaled_error"]);
    let mut fits = serde_json::Map::new();
    for &m in &sec.terms {
        let fit = symbol_decay_fit(&cfg, &cfg.modes, &sigma, m)?;
        for p in &fit.points {
            decay.push([
                m.to_string(),
                num(p.xi_norm),
                num(p.error),
                num(p.error * p.xi_norm.powi(m as i32 + 1)),
            ]);
        }
        let width = if m == 0 {
            tol.principal_slope
        } else {
            tol.decay_slope
        };
        out.contracts.push(Contract::within(
            format!("decay_slope[M={m}]"),
            fit.fit.slope,
            -((m + 1) as f64),
            width,
        ));
        fits.insert(
            m.to_string(),
            json!({
                "slope": fit.fit.slope,
                "intercept": fit.fit.intercept,
                "max_deviation": fit.fit.max_deviation,
                "scaled_bound": fit.scaled_bound,
            }),
        );
    }

    let mut fields = Table::new("fields", &["xi_norm", "curl", "divergence", "hodge"]);
    let mut order: Vec<&_> = solved.iter().collect();
    order.sort_by(|a, b| a.xi[0].hypot(a.xi[1]).total_cmp(&b.xi[0].hypot(b.xi[1])));
    for s in order.into_iter().take(sec.field_checks) {
        let r = field_residuals(&cfg, s)?;
        let n = s.xi[0].hypot(s.xi[1]);
        fields.push([num(n), num(r.curl), num(r.divergence), num(r.hodge)]);
        out.contracts.push(Contract::at_most(
            format!("curl_residual[|xi|={n:.6}]"),
            r.curl,
            tol.curl,
        ));
        out.contracts.push(Contract::at_most(
            format!("divergence_residual[|xi|={n:.6}]"),
            r.divergence,
            tol.divergence,
        ));
        out.contracts.push(Contract::at_most(
            format!("hodge_residual[|xi|={n:.6}]"),
            r.hodge,
            tol.hodge,
        ));
    }

    out.result("lambda", sec.lambda);
    out.result("mode", cfg.mode.as_str());
    out.result("fits", fits);
    out.result(
        "max_condition",
        solved.iter().map(|s| s.condition).fold(0.0, f64::max),
    );
    out.tables.push(modes);
    out.tables.push(decay);
    out.tables.push(fields);
    Ok(out)
}

/// One current loop: field samples, field-equation checks and the
/// singularity exponent along approach paths.
pub fn bfield(l: &LoadedConfig) -> Result<Outcome, CliError> {
    let sec = &l.config.bfield;
    let tol = &l.config.tolerances;
    let lp = make_loop(
        sec.center,
        sec.omega,
        sec.delta,
        sec.nodes,
        LoopMetric::Euclidean,
    )?;
    let mut out = Outcome::default();
    out.contracts.push(Contract::at_most(
        "closure_defect",
        lp.closure_defect(),
        tol.closure,
    ));

    let mut samples = Table::new(
        "samples",
        &[
            "x",
            "y",
            "z",
            "bx",
            "by",
            "bz",
            "dist_to_loop",
            "near_singular",
            "nodes_used",
            "curl",
            "divergence",
        ],
    );
    for (i, x) in sec.points.iter().enumerate() {
        let s = bfield_eval_with(&lp, sec.lambda, *x, tol.quadrature)?;
        let c = field_check(&lp, sec.lambda, *x, sec.fd_step)?;
        samples.push([
            num(x[0]),
            num(x[1]),
            num(x[2]),
            num(s.value[0]),
            num(s.value[1]),
            num(s.value[2]),
            num(s.dist_to_loop),
            s.near_singular.to_string(),
            s.nodes_used.to_string(),
            num(c.curl_residual),
            num(c.divergence_residual),
        ]);
        out.contracts.push(Contract::equals(
            format!("quadrature_converged[{i}]"),
            f64::from(u8::from(s.converged)),
            1.0,
        ));
        out.contracts.push(Contract::at_most(
            format!("curl_residual[{i}]"),
            c.curl_residual,
            tol.curl,
        ));
        out.contracts.push(Contract::at_most(
            format!("divergence_residual[{i}]"),
            c.divergence_residual,
            tol.divergence,
        ));
    }

    let mut approach = Table::new("approach", &["path", "distance", "field_norm"]);
    let mut slopes = Vec::with_capacity(sec.approach.len());
    for (i, d) in sec.approach.iter().enumerate() {
        let path = ApproachPath {
            target: lp.nodes[0],
            direction: *d,
        };
        let fit = asymptotic_fit(&lp, sec.lambda, path)?;
        for (dist, b) in &fit.points {
            approach.push([i.to_string(), num(*dist), num(*b)]);
        }
        out.contracts.push(Contract::within(
            format!("singularity_exponent[{i}]"),
            fit.fit.slope,
            -1.0,
            tol.singularity_slope,
        ));
        slopes.push(fit.fit.slope);
    }

    out.result("lambda", sec.lambda);
    out.result("delta", sec.delta);
    out.result("singularity_slopes", slopes);
    out.tables.push(samples);
    out.tables.push(approach);
    Ok(out)
}

/// Injectivity and rank probe of the loop-to-field map.
pub fn embed(l: &LoadedConfig) -> Result<Outcome, CliError> {
    let sec = &l.config.embed;
    let grid = BundleGrid {
        thetas: (0..sec.thetas)
            .map(|k| std::f64::consts::PI * (k + 1) as f64 / (sec.thetas + 1) as f64)
            .collect(),
        phis: (0..sec.phis)
            .map(|k| std::f64::consts::TAU * k as f64 / sec.phis as f64)
            .collect(),
        centers: sec.centers.clone(),
    };
    let patch = sec.patch_points();
    let settings = ProbeSettings {
        delta: sec.delta,
        lambda: sec.lambda,
        nodes: sec.nodes,
        step: sec.step,
    };
    let r = embedding_probe(&grid, &patch, &settings)?;
    let mut out = Outcome::default();
    out.contracts.push(Contract::above(
        "min_pair_distance",
        r.min_pair_distance,
        0.0,
    ));
    out.contracts.push(Contract::above(
        "min_singular_value",
        r.min_singular_value,
        0.0,
    ));
    out.contracts
        .push(Contract::equals("min_rank", r.min_rank as f64, 5.0));
    out.contracts.push(Contract::above(
        "min_patch_distance",
        r.min_patch_distance,
        0.0,
    ));
    let mut table = Table::new(
        "embedding",
        &[
            "grid_points",
            "patch_points",
            "jacobians",
            "min_pair_distance",
            "min_singular_value",
            "min_rank",
            "min_patch_distance",
        ],
    );
    table.push([
        r.grid_points.to_string(),
        r.patch_points.to_string(),
        r.jacobians.to_string(),
        num(r.min_pair_distance),
        num(r.min_singular_value),
        r.min_rank.to_string(),
        num(r.min_patch_distance),
    ]);
    out.result("probe", &r);
    out.tables.push(table);
    Ok(out)
}
