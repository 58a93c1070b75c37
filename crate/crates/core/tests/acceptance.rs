//! Acceptance suite: one line per criterion, non-zero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{
    random_dpm_utility, random_pair, random_pmf, random_ssd_pair, random_step_epsilon, random_step_gamma, rng, shrink_after,
    StepAreas,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sdorder::distributions::convolve;
use sdorder::gamma::{min_constant_epsilon, min_constant_gamma, min_gamma};
use sdorder::generators::{
    example_identical_means, example_squares, example_strict_inclusion, example_theta_family, example_two_touch, ThetaVariant,
};
use sdorder::piecewise::crossings;
use sdorder::utility::{ExclusionVerdict, MemberReason};
use sdorder::{
    agreement_easd, agreement_ffsd, agreement_mfsd, check_dpm_gamma, check_easd, check_ffsd, check_fractional, check_fsd,
    check_mfsd, check_ssd, greediness_oracle, greediness_profile, mfsd_exclusion, mixture, partial_greediness, shift,
    validate_gamma, DiscretePMF, Distribution, EpsilonFn, GammaFn, PiecewiseFn, SamplerConfig, UtilityPWL,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn identical_means_golden() -> Outcome {
    let (f, g, gamma) = example_identical_means(2.0, 1.0).map_err(|e| e.to_string())?;
    let v = check_mfsd(&f, &g, &gamma);
    ensure(v.holds && v.margin.abs() <= 1e-9, || format!("mfsd margin {}", v.margin))?;
    let w = v.witness_t.ok_or("no witness")?;
    ensure(w > 2.0 && w <= 3.0, || format!("witness {w} outside (2, 3]"))?;
    for c in [0.0, 0.25, 0.5, 0.9, 0.99] {
        let v = check_fractional(&f, &g, c).map_err(|e| e.to_string())?;
        let t = v.witness_t.ok_or("no witness")?;
        ensure(!v.holds && (t - 3.0).abs() <= 1e-9, || format!("gamma {c}: holds {} at {t}", v.holds))?;
    }
    Ok(format!("margin {:.1e}, witness {w}", v.margin))
}

fn squares_golden() -> Outcome {
    let g = GammaFn::step(0.5, vec![-1.0], vec![0.75]).unwrap();
    let s = example_squares(0.5, &g, 0.0).map_err(|e| e.to_string())?;
    ensure((s.m, s.n) == (3, 5), || format!("chose {}/{}", s.m, s.n))?;
    ensure(check_mfsd(&s.f, &s.g, &g).holds, || "mfsd fails".into())?;
    ensure(!check_fractional(&s.f, &s.g, 0.5).unwrap().holds, || "fractional holds".into())?;
    let r = StepAreas::new(&s.f, &s.g);
    let end = *r.grid.last().unwrap();
    let ratio = r.a_neg(end) / r.a_pos(end);
    ensure((ratio - 0.6).abs() <= 1e-12, || format!("ratio {ratio}"))?;
    Ok(format!("M/N = 3/5, measured {ratio}"))
}

fn strict_inclusion_golden() -> Outcome {
    let half = GammaFn::constant(0.5).unwrap();
    let (f, g) = example_strict_inclusion(0.0, &half, 0.25).map_err(|e| e.to_string())?;
    let r = StepAreas::new(&f, &g);
    let end = *r.grid.last().unwrap();
    ensure(r.a_pos(end) == 0.25 && r.a_neg(end) == 0.125, || format!("areas {} {}", r.a_pos(end), r.a_neg(end)))?;
    let gc = min_constant_gamma(&f, &g).raw();
    let ec = min_constant_epsilon(&f, &g).raw();
    ensure((gc - 0.5).abs() <= 1e-12, || format!("min gamma {gc}"))?;
    ensure((ec - 1.0 / 3.0).abs() <= 1e-12, || format!("min epsilon {ec}"))?;
    Ok(format!("A+ 0.25, A- 0.125, gamma {gc}, epsilon {ec:.12}"))
}

fn min_gamma_optimality() -> Outcome {
    let mut r = rng(4);
    let (mut crossing, mut tight) = (0, 0);
    for i in 0..200 {
        let (f, g) = random_ssd_pair(&mut r, 12);
        let m = min_gamma(&f, &g).map_err(|e| format!("pair {i}: {e}"))?;
        let v = check_mfsd(&f, &g, &m);
        ensure(v.margin >= -1e-9, || format!("pair {i}: margin {}", v.margin))?;
        // Independent check of the envelope against the rectangle sums.
        let reference = StepAreas::new(&f, &g);
        let mut running = 0.0f64;
        for &t in &reference.grid {
            if reference.a_neg(t) > 0.0 {
                running = running.max(reference.a_neg(t) / reference.a_pos(t));
            }
            ensure((m.eval(t) - running).abs() <= 1e-12, || format!("pair {i}: envelope {} vs {running} at {t}", m.eval(t)))?;
        }
        if let Some(&x1) = crossings(&f, &g).first() {
            if m.upper() > 0.0 {
                crossing += 1;
                if !check_mfsd(&f, &g, &shrink_after(&m, x1, 0.999)).holds {
                    tight += 1;
                }
            }
        }
    }
    let share = tight as f64 / crossing.max(1) as f64;
    ensure(share >= 0.95, || format!("shrinking broke {tight}/{crossing}"))?;
    Ok(format!("shrinking breaks {tight}/{crossing} crossing pairs"))
}

fn oracle_mfsd() -> Outcome {
    let mut r = rng(5);
    let mut fails = 0;
    for i in 0..100 {
        let (f, g) = random_pair(&mut r, 8);
        let gamma = random_step_gamma(&mut r, 0.0, 1.0);
        let cfg = SamplerConfig::for_pair(&f, &g, i, 500).unwrap();
        let rep = agreement_mfsd(&f, &g, &gamma, &cfg).map_err(|e| e.to_string())?;
        ensure(rep.agree && rep.tested == 500, || format!("triple {i}: {}", rep.summary()))?;
        if !rep.verdict.holds {
            fails += 1;
            let gap = rep.witness_gap.unwrap();
            ensure(gap < -1e-12, || format!("triple {i}: witness gap {gap}"))?;
        }
    }
    Ok(format!("100 triples agree, {fails} failing verdicts confirmed by witnesses"))
}

fn oracle_ffsd() -> Outcome {
    let mut r = rng(6);
    let mut fails = 0;
    for i in 0..100 {
        let (f, g) = random_pair(&mut r, 8);
        let gamma = random_step_gamma(&mut r, 0.05, 1.0);
        let cfg = SamplerConfig::for_pair(&f, &g, i, 500).unwrap();
        let rep = agreement_ffsd(&f, &g, &gamma, &cfg).map_err(|e| e.to_string())?;
        ensure(rep.agree, || format!("triple {i}: {}", rep.summary()))?;
        if !rep.verdict.holds {
            fails += 1;
            ensure(rep.witness_gap.unwrap() < 0.0, || format!("triple {i}: witness gap not negative"))?;
        }
    }
    Ok(format!("100 triples agree, {fails} failing verdicts confirmed by witnesses"))
}

fn almost_dominance() -> Outcome {
    let mut r = rng(7);
    for i in 0..200 {
        let (f, g) = random_pair(&mut r, 10);
        let c = r.gen_range(0.01..0.49);
        let reference = StepAreas::new(&f, &g);
        let end = *reference.grid.last().unwrap();
        let (n, p) = (reference.a_neg(end), reference.a_pos(end));
        let closed = n + p == 0.0 || c >= n / (n + p);
        let got = check_easd(&f, &g, &EpsilonFn::constant(c).unwrap()).holds;
        ensure(got == closed, || format!("pair {i}: decider {got}, closed form {closed} at c = {c}"))?;
    }
    for i in 0..50 {
        let (f, g) = random_pair(&mut r, 8);
        let eps = random_step_epsilon(&mut r, 0.05, 0.49);
        let cfg = SamplerConfig::for_pair(&f, &g, i, 500).unwrap();
        let rep = agreement_easd(&f, &g, &eps, &cfg).map_err(|e| e.to_string())?;
        ensure(rep.agree, || format!("triple {i}: {}", rep.summary()))?;
    }
    Ok("200 constant reductions exact, 50 oracle triples agree".into())
}

fn greediness_coincidence() -> Outcome {
    let mut r = rng(8);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let gamma = random_step_gamma(&mut r, 0.2, 1.0);
        let u = random_dpm_utility(&mut r, &gamma);
        ensure(check_dpm_gamma(&u, &gamma).member, || format!("utility {i} not in class"))?;
        for _ in 0..5 {
            let x = r.gen_range(-4.0..4.0);
            let (exact, brute) = (partial_greediness(&u, x), greediness_oracle(&u, x, 50));
            worst = worst.max((exact - brute).abs());
            ensure((exact - brute).abs() <= 1e-9, || format!("utility {i} at {x}: {exact} vs {brute}"))?;
        }
        let p = greediness_profile(&u);
        ensure(p.values().windows(2).all(|w| w[0] >= w[1]), || format!("utility {i}: profile increases"))?;
        ensure(p.values().iter().all(|&v| v >= 1.0), || format!("utility {i}: profile below 1"))?;
        for &b in u.knots().iter().chain(gamma.knots()) {
            ensure(p.eval(b) == p.eval(b + 1e-9), || format!("utility {i}: not right-continuous at {b}"))?;
            ensure(p.eval(b) <= 1.0 / gamma.eval(b) + 1e-9, || format!("utility {i}: bound exceeded at {b}"))?;
        }
    }
    Ok(format!("500 probes, largest deviation {worst:.1e}"))
}

fn random_concave(r: &mut ChaCha8Rng) -> UtilityPWL {
    let n = r.gen_range(0..5);
    let mut knots: Vec<f64> = (0..n).map(|_| r.gen_range(-3.0..3.0)).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut s = r.gen_range(1.0..4.0);
    let mut slopes = vec![s];
    for _ in 0..knots.len() {
        s *= r.gen_range(0.0..1.0);
        slopes.push(s);
    }
    UtilityPWL::new((0.0, 0.0), knots, slopes).unwrap()
}

fn exclusion_criteria() -> Outcome {
    let (touch_u, touch_g) = example_two_touch();
    let (theta_u, theta_g) = example_theta_family(0.25, ThetaVariant::Ff, 8).map_err(|e| e.to_string())?;
    let first = (mfsd_exclusion(&touch_u, &touch_g), mfsd_exclusion(&theta_u, &theta_g));
    ensure(first.0 == ExclusionVerdict::ExcludedByTwoTouches { x0: -3.0, x1: 0.5 }, || format!("two-touch: {:?}", first.0))?;
    ensure(matches!(first.1, ExclusionVerdict::ExcludedByStrictIncrease { .. }), || format!("staircase: {:?}", first.1))?;
    for seed in 0..10 {
        let mut r = rng(seed);
        ensure(mfsd_exclusion(&touch_u, &touch_g) == first.0, || format!("seed {seed}: two-touch changed"))?;
        ensure(mfsd_exclusion(&theta_u, &theta_g) == first.1, || format!("seed {seed}: staircase changed"))?;
        let gamma = random_step_gamma(&mut r, 0.0, 1.0);
        for _ in 0..10 {
            let u = random_concave(&mut r);
            let v = mfsd_exclusion(&u, &gamma);
            ensure(v == ExclusionVerdict::MemberByConstruction(MemberReason::Concave), || format!("seed {seed}: concave gave {v:?}"))?;
        }
    }
    Ok("two-touch (-3, 0.5), staircase strict increase, 100 concave members".into())
}

fn pmf(f: &Distribution) -> DiscretePMF {
    DiscretePMF::new(f.atoms().unwrap()).unwrap()
}

/// Smallest step gamma above every `g` on the joint knots.
fn step_above(gs: &[GammaFn]) -> GammaFn {
    let mut knots: Vec<f64> = gs.iter().flat_map(|g| g.knots().to_vec()).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let first = knots.first().copied().unwrap_or(0.0);
    let left = gs.iter().map(|g| g.sup_on(f64::NEG_INFINITY, first)).fold(0.0, f64::max);
    let values = (0..knots.len())
        .map(|k| {
            let end = knots.get(k + 1).copied().unwrap_or(f64::INFINITY);
            gs.iter().map(|g| g.sup_on(knots[k], end)).fold(0.0, f64::max)
        })
        .collect();
    GammaFn::step(if knots.is_empty() { gs.iter().map(|g| g.upper()).fold(0.0, f64::max) } else { left }, knots, values).unwrap()
}

fn stability() -> Outcome {
    let mut r = rng(10);
    for i in 0..100 {
        let (f, g) = random_ssd_pair(&mut r, 8);
        let gamma = min_gamma(&f, &g).unwrap();
        let c = r.gen_range(0.0..3.0);
        ensure(check_mfsd(&shift(&f, c), &shift(&g, c), &gamma).holds, || format!("shift {i}"))?;
        let z = random_pmf(&mut r, 4).map(f64::abs).unwrap();
        let (fz, gz) = (convolve(&pmf(&f), &z).to_distribution(), convolve(&pmf(&g), &z).to_distribution());
        ensure(check_mfsd(&fz, &gz, &gamma).holds, || format!("convolution {i}"))?;

        let (f2, g2) = random_ssd_pair(&mut r, 8);
        let shared = step_above(&[gamma.clone(), min_gamma(&f2, &g2).unwrap()]);
        ensure(check_mfsd(&f, &g, &shared).holds && check_mfsd(&f2, &g2, &shared).holds, || format!("mixture {i}: components"))?;
        let w = r.gen_range(0.05..0.95);
        let (fm, gm) = (mixture(&[f.clone(), f2], &[w, 1.0 - w]).unwrap(), mixture(&[g.clone(), g2], &[w, 1.0 - w]).unwrap());
        ensure(check_mfsd(&fm, &gm, &shared).holds, || format!("mixture {i}"))?;
    }
    // Pointwise limits: knots moving left onto their limit, and lifts decreasing onto the minimal gamma.
    let mut limits = 0;
    let mut tries = 0;
    while limits < 100 {
        tries += 1;
        ensure(tries < 100_000, || format!("only {limits} limit instances"))?;
        let (f, g) = random_ssd_pair(&mut r, 8);
        let gamma = random_step_gamma(&mut r, 0.2, 1.0);
        let values: Vec<f64> = gamma.knots().iter().map(|&k| gamma.eval(k)).collect();
        let left = gamma.carrier().left_value();
        // Offsets 1, 1/2, ..., 1/20, then down to 1e-12 where the margin is
        // within the tolerance of its left limit at the knot.
        let offsets = (1..=20).map(|n| 1.0 / n as f64).chain((2..=12).map(|e| 10f64.powi(-e)));
        let seq: Vec<GammaFn> = offsets
            .map(|d| GammaFn::step(left, gamma.knots().iter().map(|k| k - d).collect(), values.clone()).unwrap())
            .collect();
        if !seq.iter().all(|gn| check_mfsd(&f, &g, gn).holds) {
            continue;
        }
        limits += 1;
        ensure(check_mfsd(&f, &g, &gamma).holds, || format!("knot limit {limits}"))?;
        let m = min_gamma(&f, &g).unwrap();
        for n in 1..=20 {
            let lift = 1.0 / n as f64;
            let gn = validate_gamma(m.carrier().scale(1.0 - lift).add(&PiecewiseFn::constant(lift))).unwrap();
            ensure(check_mfsd(&f, &g, &gn).holds, || format!("lift sequence {limits}, n = {n}"))?;
        }
        ensure(check_mfsd(&f, &g, &m).holds, || format!("lift limit {limits}"))?;
    }
    Ok(format!("100 each of shift, convolution, mixture, limit ({tries} limit draws)"))
}

fn implication_lattice() -> Outcome {
    let mut r = rng(11);
    let mut counts = [0usize; 4];
    for i in 0..500 {
        let (f, g) = random_pair(&mut r, 8);
        let gamma = random_step_gamma(&mut r, 0.05, 1.0);
        let fsd = check_fsd(&f, &g).holds;
        let ffsd = check_ffsd(&f, &g, &gamma).map_err(|e| e.to_string())?.holds;
        let mfsd = check_mfsd(&f, &g, &gamma).holds;
        let ssd = check_ssd(&f, &g).holds;
        ensure((!fsd || ffsd) && (!ffsd || mfsd) && (!mfsd || ssd), || format!("instance {i}: {fsd} {ffsd} {mfsd} {ssd}"))?;
        for (c, b) in counts.iter_mut().zip([fsd, ffsd, mfsd, ssd]) {
            *c += b as usize;
        }
    }
    Ok(format!("holds counts FSD {} FFSD {} MFSD {} SSD {}", counts[0], counts[1], counts[2], counts[3]))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("identical-means golden", identical_means_golden),
        ("squares construction golden", squares_golden),
        ("strict inclusion golden", strict_inclusion_golden),
        ("min gamma optimality", min_gamma_optimality),
        ("MFSD expected-utility oracle", oracle_mfsd),
        ("FFSD expected-utility oracle", oracle_ffsd),
        ("almost dominance", almost_dominance),
        ("greediness coincidence", greediness_coincidence),
        ("exclusion criteria", exclusion_criteria),
        ("stability", stability),
        ("implication lattice", implication_lattice),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed in {:.1?}", criteria.len() - failed, criteria.len(), start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
