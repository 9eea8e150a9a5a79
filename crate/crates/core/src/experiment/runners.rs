use std::fmt::Write as _;

use num_traits::ToPrimitive;
use rand::Rng;
use serde_json::{json, Value};

use super::{checkpoints_for, load_table, ExperimentConfig, ExperimentKind, Outcome};
use crate::car_fock::{
    counterexample_flow, gamma, normal_order, pure_point_flow, quasifree_density_matrix, quasifree_eval, CARMonomial,
    CARPolynomial, FockSpace, Symbol,
};
use crate::error::{invalid, Error, Result};
use crate::flows::{
    average_series, bsz_check, constant_flow, decay_fit, default_checkpoints, rotation_flow, sig17, AverageSeries,
    BszParams, DecayFit, Flow, FnFlow,
};
use crate::free_words::{free_clt_moments, semicircle_moments, word_expansion_moments, DEFAULT_WORD_BUDGET};
use crate::linalg::{c, inner, seeded_rng, CMatrix, DensityState, UnitaryMatrix};
use crate::matrix_dynamics::{
    ad_flow, finite_vn_average_bound, quantize_unitary, trace_product_sum, TraceProductSpec, DEFAULT_GRID_CAP,
};
use crate::moebius::{unit_phase, PolynomialPhase, DEFAULT_N_MAX};

pub(super) fn dispatch(kind: ExperimentKind, config: &ExperimentConfig, workers: usize) -> Result<Outcome> {
    match kind {
        ExperimentKind::Sieve => sieve(config),
        ExperimentKind::Decay => decay(config, workers),
        ExperimentKind::MatrixFlow => matrix_flow(config, workers),
        ExperimentKind::Prop31 => prop31(config),
        ExperimentKind::Quantize => quantize(config),
        ExperimentKind::CarDemo => car_demo(config),
        ExperimentKind::Counterexample => counterexample(config, workers),
        ExperimentKind::PurePoint => pure_point(config, workers),
        ExperimentKind::FreeClt => free_clt(config),
        ExperimentKind::BszCheck => bsz(config),
    }
}

fn seed(config: &ExperimentConfig) -> u64 {
    config.seed.expect("validated: randomized experiments carry a seed")
}

fn csv_text(series: &AverageSeries) -> Result<String> {
    let mut buf = Vec::new();
    series.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV is ASCII"))
}

fn series_summary(series: &AverageSeries, fit: Option<&DecayFit>) -> Value {
    let last = series.last();
    let mut v = json!({
        "label": series.label,
        "bound": series.bound,
        "n_last": series.checkpoints.last(),
        "s_last_re": last.re,
        "s_last_im": last.im,
        "s_last_abs": last.norm(),
    });
    if let Some(f) = fit {
        v["decay_fit"] = json!({
            "c": f.c,
            "h": if f.exact_zero { None } else { Some(f.h) },
            "r_squared": f.r_squared,
            "points_used": f.points_used,
            "zeros_dropped": f.zeros_dropped,
            "exact_zero": f.exact_zero,
        });
    }
    v
}

fn series_outcome(kind: ExperimentKind, series: &AverageSeries) -> Result<Outcome> {
    let fit = decay_fit(series).ok();
    Ok(Outcome {
        tables: vec![(format!("{}.csv", kind.name()), csv_text(series)?)],
        summary: series_summary(series, fit.as_ref()),
    })
}

fn sieve(config: &ExperimentConfig) -> Result<Outcome> {
    let n_max = config.n_max.unwrap_or(DEFAULT_N_MAX);
    let table = load_table(n_max)?;
    let checkpoints = checkpoints_for(config, 1.0, n_max)?;
    let mut csv = String::from("N,mertens,mertens_over_n,squarefree_density\n");
    for &n in &checkpoints {
        let m = table.mertens(n)?;
        writeln!(
            csv,
            "{n},{m},{},{}",
            sig17(m as f64 / n as f64),
            sig17(table.squarefree_density(n)?)
        )
        .expect("writing to a String");
    }
    let m = table.mertens(n_max)?;
    Ok(Outcome {
        tables: vec![("sieve.csv".into(), csv)],
        summary: json!({
            "n_max": n_max,
            "mertens": m,
            "mertens_over_n": m as f64 / n_max as f64,
            "squarefree_density": table.squarefree_density(n_max)?,
            "six_over_pi_squared": 6.0 / (std::f64::consts::PI * std::f64::consts::PI),
            "primes": table.primes().len(),
        }),
    })
}

fn default_series_checkpoints(config: &ExperimentConfig, n_max: u64) -> Result<Vec<u64>> {
    if config.checkpoints.is_none() && n_max >= 1000 {
        let mut c: Vec<u64> = default_checkpoints().into_iter().filter(|&n| n < n_max).collect();
        c.push(n_max);
        return Ok(c);
    }
    checkpoints_for(config, 1.0, n_max)
}

fn decay(config: &ExperimentConfig, workers: usize) -> Result<Outcome> {
    let n_max = config.n_max.unwrap_or(DEFAULT_N_MAX);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let coeffs = config.params.coeffs.clone().unwrap_or_else(|| vec![0.0, golden]);
    let phase = PolynomialPhase::new(coeffs, 1, 0)?;
    let label = format!("phase{:?}", phase.coeffs());
    let flow = FnFlow::new(label, 1.0, move |n| unit_phase(phase.reduced_value(n)));
    let table = load_table(n_max)?;
    let series = average_series(&flow, &table, &default_series_checkpoints(config, n_max)?, workers)?;
    series_outcome(ExperimentKind::Decay, &series)
}

fn matrix_flow(config: &ExperimentConfig, workers: usize) -> Result<Outcome> {
    let n_max = config.n_max.unwrap_or(100_000);
    let dim = config.params.dim.unwrap_or(8);
    let mut rng = seeded_rng(seed(config));
    let u = UnitaryMatrix::haar(dim, &mut rng);
    let a = CMatrix::random_with_norm(dim, 1.0, &mut rng);
    let rho = DensityState::random(dim, &mut rng);
    let flow = ad_flow(&u, &a, &rho)?;
    let table = load_table(n_max)?;
    let series = average_series(&flow, &table, &default_series_checkpoints(config, n_max)?, workers)?;
    series_outcome(ExperimentKind::MatrixFlow, &series)
}

fn prop31(config: &ExperimentConfig) -> Result<Outcome> {
    let horizon = config.params.horizon.unwrap_or(1000);
    let n_max = config.n_max.unwrap_or(horizon);
    let k = config.params.dim.unwrap_or(2);
    let d = config.params.factors.unwrap_or(2);
    let instances = config.params.instances.unwrap_or(5);
    if horizon > n_max {
        return Err(invalid(format!("horizon {horizon} exceeds n_max = {n_max}")));
    }
    let table = load_table(n_max)?;
    let mut csv = String::from("instance_seed,k,d,N,re,im,abs,eigen_re,eigen_im,max_term_gap\n");
    let mut worst_gap = 0.0f64;
    for i in 0..instances as u64 {
        let s = seed(config).wrapping_add(i);
        let spec = TraceProductSpec::random_linear(k, d, s);
        let r = trace_product_sum(&spec, &table, horizon, true)?;
        let e = r.eigen_value.expect("two-path evaluation requested");
        worst_gap = worst_gap.max(r.max_term_gap);
        writeln!(
            csv,
            "{s},{k},{d},{horizon},{},{},{},{},{},{}",
            sig17(r.value.re),
            sig17(r.value.im),
            sig17(r.value.norm()),
            sig17(e.re),
            sig17(e.im),
            sig17(r.max_term_gap)
        )
        .expect("writing to a String");
    }
    Ok(Outcome {
        tables: vec![("prop31.csv".into(), csv)],
        summary: json!({ "instances": instances, "k": k, "d": d, "N": horizon, "max_term_gap": worst_gap }),
    })
}

fn quantize(config: &ExperimentConfig) -> Result<Outcome> {
    let dim = config.params.dim.unwrap_or(8);
    let epsilon = config.params.epsilon.unwrap_or(0.1);
    let horizon = config.params.horizon.unwrap_or(100);
    let n_max = config.n_max.unwrap_or(horizon);
    let mut rng = seeded_rng(seed(config));
    let u = UnitaryMatrix::haar(dim, &mut rng);
    let t = CMatrix::random_with_norm(dim, 1.0, &mut rng);
    let a = CMatrix::random(dim, dim, &mut rng);
    let q = quantize_unitary(&u, epsilon, horizon, DEFAULT_GRID_CAP)?;
    let mut csv = String::from("n,power_gap,epsilon\n");
    let mut max_gap = 0.0f64;
    let (mut un, mut vn) = (CMatrix::identity(dim), CMatrix::identity(dim));
    for n in 1..=horizon {
        un = &un * u.matrix();
        vn = &vn * q.v.matrix();
        let gap = (&un - &vn).op_norm();
        max_gap = max_gap.max(gap);
        writeln!(csv, "{n},{},{}", sig17(gap), sig17(epsilon)).expect("writing to a String");
    }
    let table = load_table(n_max)?;
    let report = finite_vn_average_bound(&u, &q, &t, &a, &table, horizon)?;
    Ok(Outcome {
        tables: vec![("quantize.csv".into(), csv)],
        summary: json!({
            "dim": dim,
            "epsilon": epsilon,
            "horizon": horizon,
            "grid": q.grid,
            "step_error": q.step_error,
            "max_power_gap": max_gap,
            "s_n_abs": report.s_n.norm(),
            "s_n_quantized_abs": report.s_n_quantized.norm(),
            "bound": report.bound,
            "cs_bound": report.cs_bound,
            "bound_dominates": report.s_n.norm() <= report.bound + 1e-12,
            "cs_bound_dominates": report.s_n.norm() <= report.cs_bound + 1e-12,
        }),
    })
}

fn car_demo(config: &ExperimentConfig) -> Result<Outcome> {
    let d = config.params.dim.unwrap_or(4);
    let samples = config.params.instances.unwrap_or(10);
    let space = FockSpace::new(d)?;
    let mut rng = seeded_rng(seed(config));
    let dim = space.dim();
    let zero = CMatrix::zeros(dim, dim);
    let mut worst = [0.0f64; 6];
    for _ in 0..samples {
        let f = crate::linalg::random_vector(d, &mut rng);
        let g = crate::linalg::random_vector(d, &mut rng);
        let af = space.creation_matrix(&f)?;
        let ag = space.creation_matrix(&g)?;
        let agd = ag.adjoint();
        worst[0] = worst[0].max((&(&af * &ag) + &(&ag * &af)).max_abs_diff(&zero));
        let id = CMatrix::identity(dim).scale(inner(&f, &g));
        worst[1] = worst[1].max((&(&af * &agd) + &(&agd * &af)).max_abs_diff(&id));
        worst[2] = worst[2].max((&af * &af).max_abs_diff(&zero));

        let u = UnitaryMatrix::haar(d, &mut rng);
        let gu = gamma(&space, &u)?;
        let lhs = &(gu.matrix() * &af) * &gu.matrix().adjoint();
        worst[3] = worst[3].max(lhs.max_abs_diff(&space.creation_matrix(&u.apply(&f))?));

        let t = Symbol::random(d, &mut rng);
        let rho = quasifree_density_matrix(&t, &space)?;
        let n = rng.random_range(0..=3);
        let m = CARPolynomial::from_monomial(CARMonomial::random_normal_ordered(d, n, n, &mut rng));
        worst[4] = worst[4].max((quasifree_eval(&t, &m)? - rho.expect(&m.matrix(&space)?)).norm());

        let p = CARPolynomial::from_monomial(CARMonomial::random(d, rng.random_range(1..=6), &mut rng));
        worst[5] = worst[5].max(p.matrix(&space)?.max_abs_diff(&normal_order(&p).matrix(&space)?));
    }
    let checks = [
        ("anticommutator_a_f_a_g", 1e-12),
        ("anticommutator_a_f_a_g_star", 1e-12),
        ("square_a_f", 1e-12),
        ("bogoliubov_covariance", 1e-10),
        ("determinant_vs_density", 1e-10),
        ("normal_order_preserves_matrix", 1e-10),
    ];
    let mut csv = String::from("check,max_residual,tolerance,pass\n");
    let mut all = true;
    for ((name, tol), r) in checks.iter().zip(worst) {
        let pass = r <= *tol;
        all &= pass;
        writeln!(csv, "{name},{},{},{pass}", sig17(r), sig17(*tol)).expect("writing to a String");
    }
    if !all {
        return Err(Error::Numerical(format!(
            "CAR identity residuals exceed tolerance:\n{csv}"
        )));
    }
    Ok(Outcome {
        tables: vec![("car-demo.csv".into(), csv)],
        summary: json!({ "d": d, "samples": samples, "all_pass": all }),
    })
}

fn counterexample(config: &ExperimentConfig, workers: usize) -> Result<Outcome> {
    let l = config.params.window.unwrap_or(10_000);
    let n_max = config.n_max.unwrap_or(l);
    let table = load_table(n_max)?;
    let flows = counterexample_flow(l, &table)?;
    let checkpoints = checkpoints_for(config, 1.0, l)?;
    let bh = flows.bh_series(&table, &checkpoints, workers)?;
    let car = flows.car_series(&table, &checkpoints, workers)?;
    let m = table.mertens(l)? as f64 / l as f64;
    let q = table.squarefree_density(l)?;
    Ok(Outcome {
        tables: vec![
            ("counterexample.csv".into(), csv_text(&bh)?),
            ("counterexample_car.csv".into(), csv_text(&car)?),
        ],
        summary: json!({
            "window": l,
            "bh_s_last": bh.last().re,
            "car_s_last": car.last().re,
            "squarefree_density": q,
            "mertens_over_n": m,
            "car_expected": 0.5 * (m + q),
            "car_limit": 3.0 / (std::f64::consts::PI * std::f64::consts::PI),
        }),
    })
}

fn pure_point(config: &ExperimentConfig, workers: usize) -> Result<Outcome> {
    let n_max = config.n_max.unwrap_or(100_000);
    let d = config.params.dim.unwrap_or(6);
    let degree = config.params.degree.unwrap_or(4);
    let mut rng = seeded_rng(seed(config));
    let angles: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let t = Symbol::random(d, &mut rng);
    let a = CARPolynomial::from_monomial(CARMonomial::random_balanced(d, degree, &mut rng));
    let flow = pure_point_flow(&angles, &a, t)?;
    let table = load_table(n_max)?;
    let series = average_series(&flow, &table, &default_series_checkpoints(config, n_max)?, workers)?;
    series_outcome(ExperimentKind::PurePoint, &series)
}

fn free_clt(config: &ExperimentConfig) -> Result<Outcome> {
    let q = config.params.q.unwrap_or(10);
    let p_max = config.params.p_max.unwrap_or(8);
    let moments = free_clt_moments(q, p_max)?;
    let half = num_rational::BigRational::new(1.into(), 2.into());
    let semi = semicircle_moments(&half, p_max);
    let words = if q <= 3 && p_max <= 6 {
        Some(word_expansion_moments(q, p_max, DEFAULT_WORD_BUDGET)?)
    } else {
        None
    };
    if let Some(w) = &words {
        if *w != moments {
            return Err(Error::Numerical(
                "word expansion disagrees with cumulant moments".into(),
            ));
        }
    }
    let mut csv = String::from("p,m_p,semicircle_m_p,gap,m_p_exact\n");
    for p in 1..=p_max {
        let m = &moments[p - 1];
        let s = &semi[p - 1];
        let gap = s - m;
        writeln!(
            csv,
            "{p},{},{},{},{m}",
            sig17(m.to_f64().unwrap_or(f64::NAN)),
            sig17(s.to_f64().unwrap_or(f64::NAN)),
            sig17(gap.to_f64().unwrap_or(f64::NAN)),
        )
        .expect("writing to a String");
    }
    Ok(Outcome {
        tables: vec![("free-clt.csv".into(), csv)],
        summary: json!({
            "q": q,
            "p_max": p_max,
            "word_expansion_checked": words.is_some(),
            "m4_exact": moments.get(3).map(|m| m.to_string()),
        }),
    })
}

fn bsz(config: &ExperimentConfig) -> Result<Outcome> {
    let n_max = config.n_max.unwrap_or(DEFAULT_N_MAX);
    let epsilon = config.params.epsilon.unwrap_or(0.25);
    let m = config.params.m.unwrap_or(10_000);
    let kind = config.params.flow.clone().unwrap_or_else(|| "golden".into());
    let flow: Box<dyn Flow> = match kind.as_str() {
        "golden" => Box::new(rotation_flow((5f64.sqrt() - 1.0) / 2.0)),
        "constant" => Box::new(constant_flow(c(1.0, 0.0))),
        other => {
            return Err(invalid(format!(
                "bilinear check flow must be `golden` or `constant`, got `{other}`"
            )))
        }
    };
    let table = load_table(n_max)?;
    let r = bsz_check(&flow, &table, BszParams::new(epsilon, m, n_max))?;
    let (p1, p2) = r.worst_pair.unwrap_or((0, 0));
    let mut csv = String::from(
        "flow,epsilon,M,N,prime_limit,partial,primes_checked,pairs_checked,hypothesis_holds,\
         max_correlation_ratio,worst_p1,worst_p2,mobius_sum_abs,criterion_bound,within_bound\n",
    );
    writeln!(
        csv,
        "{kind},{},{m},{n_max},{},{},{},{},{},{},{p1},{p2},{},{},{}",
        sig17(epsilon),
        r.prime_limit,
        r.partial,
        r.primes_checked,
        r.prime_pairs_checked,
        r.hypothesis_holds,
        sig17(r.max_correlation_ratio),
        sig17(r.mobius_sum_abs),
        sig17(r.criterion_bound),
        r.within_bound
    )
    .expect("writing to a String");
    Ok(Outcome {
        tables: vec![("bsz-check.csv".into(), csv)],
        summary: json!({
            "flow": kind,
            "hypothesis_holds": r.hypothesis_holds,
            "within_bound": r.within_bound,
            "partial": r.partial,
        }),
    })
}
