use crate::config::{Command, RunConfig};
use crate::{Cell, CliError, Report};
use eisenlab::arith_coeffs::{build_table, DivisorTable};
use eisenlab::eisenstein::{context_with_table, eval_e_star, make_context, rho_scaled, truncation_index_rho, SpectralContext};
use eisenlab::mellin_side::{gamma_plancherel, identity_3pi_ctx, parseval_rhs, zeta_line_sq};
use eisenlab::rational_x::{change_of_basis_check, gcd, i_delta_rational};
use eisenlab::restriction::{
    i_psi, make_window, que_density, que_ratio_on, required_table, GeodesicPatch, Profile, TestWindow, YGrid, E_TOL,
};
use eisenlab::sums_lab::{
    diagonal_main, dyadic_total, i_delta, mt_od, poly_ineq_check, q_dyadic_table, shifted_sum, sieve_product, w2,
    DyadicBlock, Kernel, ShiftWeight,
};
use eisenlab::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

type R = Result<Report, CliError>;

pub fn dispatch(cfg: &RunConfig) -> R {
    match cfg.command {
        Command::Identity3pi => identity(cfg),
        Command::Plancherel => plancherel(cfg),
        Command::Parseval => parseval(cfg),
        Command::Eval => eval(cfg),
        Command::Restrict => restrict(cfg),
        Command::QueScan => que_scan(cfg),
        Command::IDelta => i_delta_cmd(cfg),
        Command::Diagonal => diagonal(cfg),
        Command::ShiftedSum => shifted(cfg),
        Command::MtOd => mt_od_cmd(cfg),
        Command::QScan => q_scan(cfg),
        Command::Sieve => sieve(cfg),
        Command::RationalCheck => rational(cfg),
    }
}

/// Divisor table, cached under `$EISENLAB_CACHE` when set.
pub fn table(n: usize, t: f64) -> Result<DivisorTable, CliError> {
    match std::env::var_os("EISENLAB_CACHE") {
        Some(dir) if !dir.is_empty() => Ok(DivisorTable::cached(Path::new(&dir), n, t)?),
        _ => Ok(build_table(n, t)?),
    }
}

fn window_context(t: f64, w: &TestWindow) -> Result<SpectralContext, CliError> {
    let n = required_table(t, w, rho_scaled(t)?);
    Ok(context_with_table(t, table(n, t)?)?)
}

fn window(cfg: &RunConfig) -> Result<TestWindow, CliError> {
    let (a, b) = cfg.window()?;
    Ok(make_window(a, b)?)
}

fn nonempty(cfg: &RunConfig, key: &str) -> Result<Vec<f64>, CliError> {
    let v = cfg.f64_list(key)?;
    if v.is_empty() {
        return Err(CliError::Validation(format!("{key} must not be empty")));
    }
    Ok(v)
}

fn uniform(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(0.0..1.0)).collect()
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn identity(cfg: &RunConfig) -> R {
    let mut rep = Report::new(&["T", "residual_3pi", "normalization"]);
    for t in nonempty(cfg, "T")? {
        let ctx = make_context(t, 1)?;
        let r = identity_3pi_ctx(&ctx)?;
        let n = ctx.diagnostics.normalization;
        if !(r <= cfg.tol("identity")) {
            rep.fail(format!("T={t}: 3/π residual {r:e}"));
        }
        if !(n <= cfg.tol("normalization")) {
            rep.fail(format!("T={t}: normalization residual {n:e}"));
        }
        rep.push(vec![t.into(), r.into(), n.into()]);
    }
    Ok(rep)
}

fn plancherel(cfg: &RunConfig) -> R {
    let mut rep = Report::new(&["T", "residual"]);
    for t in nonempty(cfg, "T")? {
        let r = gamma_plancherel(t)?;
        if !(r <= cfg.tol("plancherel")) {
            rep.fail(format!("T={t}: residual {r:e}"));
        }
        rep.push(vec![t.into(), r.into()]);
    }
    Ok(rep)
}

fn parseval(cfg: &RunConfig) -> R {
    let w = window(cfg)?;
    let mut rep = Report::new(&[
        "T",
        "x",
        "i_psi",
        "i_psi_err",
        "parseval",
        "parseval_err",
        "rel_gap",
        "tail_fraction",
    ]);
    for t in nonempty(cfg, "T")? {
        let ctx = window_context(t, &w)?;
        for x in nonempty(cfg, "x")? {
            let a = i_psi(&ctx, &w, x)?;
            let b = parseval_rhs(&ctx, &w, x)?;
            let gap = (a.value - b.value).abs() / a.value;
            if !(gap <= cfg.tol("parseval")) {
                rep.fail(format!("T={t} x={x}: relative gap {gap:e}"));
            }
            rep.push(vec![
                t.into(),
                x.into(),
                a.value.into(),
                a.est_error.into(),
                b.value.into(),
                b.est_error.into(),
                gap.into(),
                b.tail_fraction.into(),
            ]);
        }
    }
    Ok(rep)
}

fn eval(cfg: &RunConfig) -> R {
    let xs = cfg.f64_list("x")?;
    let ys = cfg.f64_list("y")?;
    let pts: Vec<(f64, f64)> = if xs.is_empty() && ys.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.u64("seed")?);
        (0..cfg.usize("points")?).map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.1..3.0))).collect()
    } else if xs.len() == ys.len() {
        xs.into_iter().zip(ys).collect()
    } else {
        return Err(CliError::Validation("x and y must have equal length".into()));
    };
    if pts.iter().any(|&(_, y)| !(y > 0.0)) {
        return Err(CliError::Validation("y must be positive".into()));
    }
    let tol = cfg.tol("truncation");
    let mut rep = Report::new(&["T", "x", "y", "E", "dev_inversion", "dev_translation"]);
    for t in nonempty(cfg, "T")? {
        let y_min = pts.iter().map(|&(x, y)| y.min(y / (x * x + y * y))).fold(f64::INFINITY, f64::min);
        let ctx = context_with_table(t, table(truncation_index_rho(y_min, t, tol, rho_scaled(t)?), t)?)?;
        for &(x, y) in &pts {
            let e0 = eval_e_star(&ctx, x, y, tol)?;
            let r2 = x * x + y * y;
            let e1 = eval_e_star(&ctx, -x / r2, y / r2, tol)?;
            let e2 = eval_e_star(&ctx, x + 1.0, y, tol)?;
            let scale = e0.abs().max(1.0);
            let (d1, d2) = ((e1 - e0).abs() / scale, (e2 - e0).abs() / scale);
            if !(d1.max(d2) <= cfg.tol("automorphy")) {
                rep.fail(format!("T={t} z={x}+{y}i: deviation {:e}", d1.max(d2)));
            }
            rep.push(vec![t.into(), x.into(), y.into(), e0.into(), d1.into(), d2.into()]);
        }
    }
    Ok(rep)
}

fn restrict(cfg: &RunConfig) -> R {
    let w = window(cfg)?;
    let mut rep = Report::new(&["T", "x", "i_psi", "est_error", "density", "l2log", "ratio"]);
    for t in nonempty(cfg, "T")? {
        let ctx = window_context(t, &w)?;
        for x in nonempty(cfg, "x")? {
            let r = i_psi(&ctx, &w, x)?;
            if !(r.est_error <= cfg.tol("quadrature") * r.value) {
                rep.fail(format!("T={t} x={x}: quadrature estimate {:e}", r.est_error / r.value));
            }
            let d = que_density(t);
            rep.push(vec![
                t.into(),
                x.into(),
                r.value.into(),
                r.est_error.into(),
                d.into(),
                w.l2log.into(),
                (r.value / (d * w.l2log)).into(),
            ]);
        }
    }
    Ok(rep)
}

fn que_scan(cfg: &RunConfig) -> R {
    let w = window(cfg)?;
    let rule = cfg.gamma_rule()?;
    let x0s = match cfg.raw("x0")? {
        "random" => uniform(cfg.u64("seed")?, cfg.usize("seeds")?),
        _ => nonempty(cfg, "x0")?,
    };
    let mut rep = Report::new(&["T", "index", "x0", "gamma", "ratio"]);
    for t in nonempty(cfg, "T")? {
        let ctx = window_context(t, &w)?;
        let profile = Profile::build(&ctx, YGrid::for_restriction(&w, t, w.nodes), E_TOL)?;
        let gamma = rule.gamma(t);
        let mut ratios = Vec::new();
        for (i, &x0) in x0s.iter().enumerate() {
            let patch = GeodesicPatch::new(x0, gamma, t, w.clone())?;
            let r = que_ratio_on(&profile, &patch);
            ratios.push(r);
            rep.push(vec![t.into(), i.into(), x0.into(), gamma.into(), r.into()]);
        }
        rep.note(&format!("median.T={t}"), median(&ratios));
        rep.note(&format!("min.T={t}"), ratios.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    Ok(rep)
}

fn i_delta_cmd(cfg: &RunConfig) -> R {
    let shape = cfg.kernel()?;
    let deltas = nonempty(cfg, "delta")?;
    let mut rep = Report::new(&["T", "delta", "x", "N", "route_a", "route_b", "rel_gap", "diagonal"]);
    for t in nonempty(cfg, "T")? {
        let n_max = deltas.iter().map(|d| (2.0 * (d * t).sqrt()).ceil() as usize + 1).max().unwrap();
        let tab = table(n_max, t)?;
        for &d in &deltas {
            let b = DyadicBlock::with_shape(d, t, shape)?;
            for x in nonempty(cfg, "x")? {
                let r = i_delta(&b, x, &tab)?;
                if !(r.rel_gap <= cfg.tol("routes")) {
                    rep.fail(format!("T={t} Δ={d} x={x}: route gap {:e}", r.rel_gap));
                }
                rep.push(vec![
                    t.into(),
                    d.into(),
                    x.into(),
                    b.n.into(),
                    r.route_a.into(),
                    r.route_b.into(),
                    r.rel_gap.into(),
                    r.diagonal.into(),
                ]);
            }
        }
    }
    Ok(rep)
}

fn diagonal(cfg: &RunConfig) -> R {
    let ns = nonempty(cfg, "N")?;
    let mut rep = Report::new(&["T", "N", "lhs", "main", "rel_err", "refined", "refined_rel_err"]);
    for t in nonempty(cfg, "T")? {
        let tab = table((2.0 * ns[ns.len() - 1]).floor() as usize + 1, t)?;
        let mut errs = Vec::new();
        for &n in &ns {
            let r = diagonal_main(n, t, w2, &tab)?;
            errs.push(r.rel_err);
            rep.push(vec![
                t.into(),
                n.into(),
                r.lhs.into(),
                r.main.into(),
                r.rel_err.into(),
                r.refined.into(),
                r.refined_rel_err.into(),
            ]);
        }
        let last = errs[errs.len() - 1];
        if !(last <= cfg.tol("diagonal")) {
            rep.fail(format!("T={t}: relative error {last:e} at N={}", ns[ns.len() - 1]));
        }
        let decreasing = errs.windows(2).all(|p| p[1] < p[0]);
        rep.note_str(&format!("decreasing.T={t}"), if decreasing { "true" } else { "false" });
    }
    Ok(rep)
}

fn shifted(cfg: &RunConfig) -> R {
    let m = cfg.i64("m")?;
    let p = cfg.f64("P")?;
    let ys = nonempty(cfg, "Y")?;
    let dil = nonempty(cfg, "dilations")?;
    if dil[0] <= 0.0 || ys[0] < 1.0 {
        return Err(CliError::Validation("dilations must be positive and Y >= 1".into()));
    }
    let mut rep =
        Report::new(&["T", "m", "Y", "dilation", "brute", "main", "err", "envelope", "regime_ok"]);
    for t in nonempty(cfg, "T")? {
        let n = (2.0 * dil[dil.len() - 1] * ys[ys.len() - 1]).ceil() as usize + m.unsigned_abs() as usize + 2;
        let tab = table(n, t)?;
        for &y in &ys {
            let (mut rel, mut scaled) = (Vec::new(), Vec::new());
            for &c in &dil {
                let w = ShiftWeight::new(c * y, 2.0 * c * y);
                let r = shifted_sum(m, t, &w, p, &tab)?;
                rel.push(r.err / r.main.abs());
                scaled.push(r.err / r.envelope);
                rep.push(vec![
                    t.into(),
                    m.into(),
                    y.into(),
                    c.into(),
                    r.brute.into(),
                    r.main.into(),
                    r.err.into(),
                    r.envelope.into(),
                    r.regime_ok.into(),
                ]);
            }
            let s = median(&scaled);
            if !(s <= cfg.tol("envelope-slack")) {
                rep.fail(format!("T={t} Y={y}: median error/envelope {s:e}"));
            }
            rep.note(&format!("median_rel_err.T={t}.Y={y}"), median(&rel));
            rep.note(&format!("median_err_over_envelope.T={t}.Y={y}"), s);
        }
    }
    Ok(rep)
}

fn mt_od_cmd(cfg: &RunConfig) -> R {
    let h_max = match cfg.raw("h-max")? {
        "auto" => None,
        _ => Some(cfg.usize("h-max")?),
    };
    let mut rep = Report::new(&["T", "delta", "x", "N", "h_max", "value", "imag", "trivial_ratio"]);
    for t in nonempty(cfg, "T")? {
        let z = zeta_line_sq(t)?;
        for d in nonempty(cfg, "delta")? {
            let b = DyadicBlock::new(d, t)?;
            for x in nonempty(cfg, "x")? {
                let r = mt_od(&b, x, h_max)?;
                if !(r.imag.abs() <= cfg.tol("imag") * r.value.abs().max(1.0)) {
                    rep.fail(format!("T={t} Δ={d} x={x}: imaginary part {:e}", r.imag));
                }
                rep.push(vec![
                    t.into(),
                    d.into(),
                    x.into(),
                    b.n.into(),
                    r.h_max.into(),
                    r.value.into(),
                    r.imag.into(),
                    (r.value.abs() / (z * b.n)).into(),
                ]);
            }
        }
    }
    Ok(rep)
}

fn q_scan(cfg: &RunConfig) -> R {
    let w1 = Kernel::get(cfg.kernel()?);
    let xs = match cfg.f64_list("x")? {
        v if v.is_empty() => uniform(cfg.u64("seed")?, cfg.usize("points")?),
        v => v,
    };
    let ks = cfg.u32_list("h-pow")?;
    let k_max = ks[ks.len() - 1];
    let rows = q_dyadic_table(&xs, k_max, w1)?;
    let mut header = vec!["index".to_string(), "x".to_string()];
    header.extend(ks.iter().map(|k| format!("total_k{k}")));
    let mut rep = Report { header, ..Default::default() };
    let mut maxima = vec![0.0f64; ks.len()];
    for (i, (x, row)) in xs.iter().zip(&rows).enumerate() {
        let mut cells: Vec<Cell> = vec![i.into(), (*x).into()];
        for (j, &k) in ks.iter().enumerate() {
            let v = dyadic_total(row, k);
            maxima[j] = maxima[j].max(v);
            cells.push(v.into());
        }
        rep.push(cells);
    }
    for (k, m) in ks.iter().zip(&maxima) {
        rep.note(&format!("max.k{k}"), *m);
    }
    let growth = maxima[maxima.len() - 1] / maxima[0] - 1.0;
    rep.note("growth", growth);
    if !(growth.abs() <= cfg.tol("growth")) {
        rep.fail(format!("maximum changes by {growth:e}"));
    }
    Ok(rep)
}

fn sieve(cfg: &RunConfig) -> R {
    let t = cfg.f64("T")?;
    let mut rep = Report::new(&["kind", "param", "value", "reference", "ok"]);
    let x_cut = cfg.f64("x-cut")?;
    let s = sieve_product(t, x_cut)?;
    let ok = s.value <= cfg.tol("sieve-slack") * s.bound_shape;
    if !ok {
        rep.fail(format!("sieve product {:e} against bound shape {:e}", s.value, s.bound_shape));
    }
    rep.push(vec!["sieve".into(), x_cut.into(), s.value.into(), s.bound_shape.into(), ok.into()]);
    let samples = cfg.usize("samples")?;
    let p = poly_ineq_check(samples, cfg.u64("seed")?);
    let ok = p.holds && p.equality_at_2;
    if !ok {
        rep.fail(format!("polynomial inequality: holds {} equality at 2 {}", p.holds, p.equality_at_2));
    }
    rep.push(vec!["poly".into(), samples.into(), p.min_margin.into(), p.margin_at_2.into(), ok.into()]);
    Ok(rep)
}

fn rational(cfg: &RunConfig) -> R {
    let q_max = cfg.usize("q-max")? as u64;
    let len_max = cfg.usize("length-max")?;
    if q_max == 0 || len_max == 0 {
        return Err(CliError::Validation("q-max and length-max must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.u64("seed")?);
    let mut rep = Report::new(&["kind", "q", "a", "len", "value", "reference", "residual"]);
    for _ in 0..cfg.usize("points")? {
        let q = rng.random_range(1..=q_max);
        let a = loop {
            let a: i64 = rng.random_range(-3 * q as i64..=3 * q as i64);
            if gcd(a.rem_euclid(q as i64) as u64, q) == 1 {
                break a;
            }
        };
        let len = rng.random_range(1..=len_max);
        let c: Vec<Complex64> =
            (0..len).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let l1: f64 = c.iter().map(|z| z.norm()).sum();
        let r = change_of_basis_check(&c, a, q)?;
        if !(r <= cfg.tol("change-of-basis") * l1) {
            rep.fail(format!("q={q} a={a}: residual {r:e} with |c|_1 = {l1:e}"));
        }
        rep.push(vec!["change_of_basis".into(), (q as i64).into(), a.into(), len.into(), r.into(), l1.into(), (r / l1).into()]);
    }
    let (q, a) = (cfg.u64("q")?, cfg.i64("a")?);
    let t = cfg.f64("T")?;
    let b = DyadicBlock::new(cfg.f64("delta")?, t)?;
    let tab = table((2.0 * b.n).ceil() as usize + 1, t)?;
    let r = i_delta_rational(&b, a, q, &tab)?;
    let d = i_delta(&b, a as f64 / q as f64, &tab)?;
    let gap = (r.value - d.value).abs() / d.value;
    if !(gap <= cfg.tol("routes")) {
        rep.fail(format!("i_delta at {a}/{q}: character route differs by {gap:e}"));
    }
    rep.push(vec!["i_delta".into(), (q as i64).into(), a.into(), 0usize.into(), r.value.into(), d.value.into(), gap.into()]);
    Ok(rep)
}
