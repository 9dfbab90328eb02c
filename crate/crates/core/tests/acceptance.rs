//! Acceptance criteria 1-9, one PASS/FAIL line each. Runs without the libtest harness so
//! the lines always reach the output; exits nonzero when any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use nba_lab::classify::{classify, Answer, Verdict};
use nba_lab::filtration::{best_approximation, find_level, standard_filtration};
use nba_lab::measure::{mu, MeasureModel, Set};
use nba_lab::metric::{dist_sq, triangle_holds};
use nba_lab::oracle::{
    enumerate_errors, exhaustive_best_approx, exhaustive_net_check, jordan_bounds, union_of_cells,
};
use nba_lab::rational::{q, qi, ExtendedRational, Q};
use nba_lab::set_algebra::{symdiff_measure, AxisBox, Region};
use nba_lab::witness::{build_net, cell_witness_error, make_tm, make_tm_eps};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fin(x: Q) -> ExtendedRational {
    ExtendedRational::Finite(x)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Every union of level-m cells is at squared distance exactly 1/2 from T_m.
fn tm_law() -> Outcome {
    let model = unit_square();
    for m in 1..=2 {
        let cells = standard_filtration(&model, m)
            .map_err(|e| e.to_string())?
            .cells(&model)
            .map_err(|e| e.to_string())?;
        let t = Set::Region(make_tm(m).map_err(|e| e.to_string())?);
        let errors = enumerate_errors(&model, &cells, &t).map_err(|e| e.to_string())?;
        ensure(errors.len() == 1 << (1 << (2 * m)), || format!("m={m}: {} unions", errors.len()))?;
        if let Some((mask, e)) = errors.iter().enumerate().find(|(_, e)| **e != fin(q(1, 2))) {
            return Err(format!("m={m}, union {mask:#x}: error {e}"));
        }
    }
    Ok("all 16 + 65536 unions at exactly 1/2".into())
}

/// min over unions of mu(A Δ T_m^eps) >= eps_sq, attained at the empty union.
fn witness_lower_bound() -> Outcome {
    let model = unit_square();
    let mut rng = rng(2);
    let eps_list = [q(1, 16), q(1, 8), q(1, 4), q(1, 2)];
    for m in 1..=3u32 {
        let p = standard_filtration(&model, m).map_err(|e| e.to_string())?;
        for s in &eps_list {
            let w = Set::Region(make_tm_eps(m, s).map_err(|e| e.to_string())?);
            ensure(mu(&model, &w).ok() == Some(fin(s.clone())), || format!("m={m}: witness measure != {s}"))?;
            if m <= 2 {
                let ex = exhaustive_best_approx(&model, &p, &w).map_err(|e| e.to_string())?;
                ensure(ex.error == fin(s.clone()) && ex.mask == 0, || {
                    format!("m={m}, eps_sq={s}: exhaustive min {} at mask {:#x}", ex.error, ex.mask)
                })?;
            } else {
                let cells = p.cells(&model).map_err(|e| e.to_string())?;
                let closed_min = (0..=64).map(|k| cell_witness_error(m, s, k)).min().unwrap();
                ensure(closed_min == *s && cell_witness_error(m, s, 0) == *s, || {
                    format!("m=3, eps_sq={s}: closed-form minimum {closed_min}")
                })?;
                let best = best_approximation(&model, &p, &w).map_err(|e| e.to_string())?;
                ensure(
                    best.error == fin(s.clone()) && best.approximant == Set::Region(Region::empty(2)),
                    || format!("m=3, eps_sq={s}: best error {}", best.error),
                )?;
                for _ in 0..40 {
                    let chosen: Vec<usize> = (0..cells.len()).filter(|_| rng.random_bool(0.3)).collect();
                    let a = union_of_cells(&model, &cells, &chosen).map_err(|e| e.to_string())?;
                    let d = dist_sq(&model, &a, &w).map_err(|e| e.to_string())?;
                    let want = cell_witness_error(m, s, chosen.len() as u64);
                    ensure(d == fin(want.clone()) && d >= fin(s.clone()), || {
                        format!("m=3, eps_sq={s}, |I|={}: direct {d} vs closed form {want}", chosen.len())
                    })?;
                }
            }
        }
    }
    Ok("m=1,2 exhaustive; m=3 closed form + 160 spot unions; minimizer empty".into())
}

/// Majority rule equals exhaustive enumeration on random instances.
fn approximation_optimality() -> Outcome {
    let mut rng = rng(3);
    let unit = AxisBox::unit(2);
    let mut max_cells = 0;
    for i in 0..200 {
        let model = if i % 4 == 3 { mixture_unit_finite_atoms() } else { unit_square() };
        let p = random_partition(&mut rng, &model, 16);
        let b = random_set(&mut rng, &model, &unit);
        let best = best_approximation(&model, &p, &b).map_err(|e| e.to_string())?;
        let ex = exhaustive_best_approx(&model, &p, &b).map_err(|e| e.to_string())?;
        max_cells = max_cells.max(p.cells(&model).map_err(|e| e.to_string())?.len());
        ensure(best.error == ex.error, || {
            format!("instance {i}: majority {} vs exhaustive {}", best.error, ex.error)
        })?;
        let direct = dist_sq(&model, &best.approximant, &b).map_err(|e| e.to_string())?;
        ensure(direct == best.error, || {
            format!("instance {i}: approximant at {direct}, reported {}", best.error)
        })?;
    }
    Ok(format!("200 instances, up to {max_cells} cells, exact agreement"))
}

/// find_level reaches every eps_sq with nonincreasing errors.
fn dyadic_approximation() -> Outcome {
    let mut rng = rng(4);
    let model = plane();
    let window = bx(qi(-2), qi(2), qi(-2), qi(2));
    let eps_list = [q(1, 4), q(1, 16), q(1, 64)];
    let mut deepest = 0;
    for i in 0..50 {
        let b = Set::Region(random_region(&mut rng, &window));
        for eps in &eps_list {
            let r = find_level(&model, &b, eps, 24).map_err(|e| format!("region {i}, eps_sq={eps}: {e}"))?;
            ensure(r.error < fin(eps.clone()), || format!("region {i}: error {} not below {eps}", r.error))?;
            ensure(r.trace.windows(2).all(|w| w[1] <= w[0]), || format!("region {i}: trace not monotone"))?;
            deepest = deepest.max(r.level);
        }
    }
    Ok(format!("150 searches terminated, deepest level {deepest}"))
}

fn expect(v: &Verdict, want: [Answer; 3], what: &str) -> Result<(), String> {
    let got = [v.separable, v.compact, v.locally_compact];
    ensure(got == want && v.complete == Answer::Yes && v.is_consistent(), || {
        format!("{what} {}: got {got:?}, want {want:?}", v.space.label())
    })
}

/// Verdicts for the worked examples and the four finite/infinite x atomic/non-atomic cases.
fn classifier() -> Outcome {
    use Answer::*;
    let infinite_atomic_compact = MeasureModel::atomic(
        nba_lab::measure::AtomUniverse::new(
            vec![("big".into(), ExtendedRational::Infinity)],
            nba_lab::measure::Tail::Geometric { first_index: 1, weight: q(1, 2), ratio: q(1, 2) },
            "x".into(),
        )
        .map_err(|e| e.to_string())?,
    );
    let cases: Vec<(&str, MeasureModel, [Answer; 3], [Answer; 3])> = vec![
        ("counting on N", counting_n(), [No, No, Yes], [Yes, No, Yes]),
        ("counting on R^d", counting_rd(), [No, No, Yes], [No, No, Yes]),
        ("Lebesgue on [0,1)^2", unit_square(), [Yes, No, No], [Yes, No, No]),
        ("counting on a ball + Lebesgue", mixture_ball_plane(), [No, No, No], [No, No, No]),
        ("finite non-atomic", unit_square(), [Yes, No, No], [Yes, No, No]),
        ("finite purely atomic (2^-n)", geometric(), [Yes, Yes, Yes], [Yes, Yes, Yes]),
        ("infinite non-atomic (Lebesgue on R^2)", plane(), [No, No, No], [Yes, No, No]),
        ("infinite purely atomic (counting on N)", counting_n(), [No, No, Yes], [Yes, No, Yes]),
        (
            "infinite purely atomic (2^-n + one infinite atom)",
            infinite_atomic_compact,
            [Yes, Yes, Yes],
            [Yes, Yes, Yes],
        ),
    ];
    for (what, model, all_want, fin_want) in &cases {
        let (all, fin) = classify(model);
        expect(&all, *all_want, what)?;
        expect(&fin, *fin_want, what)?;
    }
    Ok(format!("{} models, both spaces, no mismatches and no UNKNOWN", cases.len()))
}

/// Minimal n_eps and an exact cover; every single deletion is caught.
fn eps_net() -> Outcome {
    let model = geometric();
    for (eps, want) in [(q(1, 2), 2u32), (q(1, 4), 3), (q(1, 8), 4)] {
        let net = build_net(&model, &eps).map_err(|e| e.to_string())?;
        let tail = |n: u32| q(1, 1i64 << n);
        ensure(net.level == want && tail(net.level) < eps && eps <= tail(net.level - 1), || {
            format!("eps_sq={eps}: n_eps={} (want {want})", net.level)
        })?;
        ensure(exhaustive_net_check(&model, &net.elements, &eps, 6).map_err(|e| e.to_string())?, || {
            format!("eps_sq={eps}: net does not cover")
        })?;
        for i in 0..net.elements.len() {
            let mut short = net.elements.clone();
            short.remove(i);
            ensure(!exhaustive_net_check(&model, &short, &eps, 6).map_err(|e| e.to_string())?, || {
                format!("eps_sq={eps}: removing element {i} went unnoticed")
            })?;
        }
    }
    Ok("n_eps = 2, 3, 4; covers pass; all single deletions detected".into())
}

/// Symmetry, exact triangle inequality and identity of indiscernibles.
fn metric_axioms() -> Outcome {
    let mut rng = rng(7);
    let models = [unit_square(), plane(), geometric(), counting_n(), mixture_unit_atoms()];
    let window = bx(qi(-1), qi(1), qi(-1), qi(1));
    let unit = AxisBox::unit(2);
    let mut zeros = 0;
    for i in 0..500 {
        let model = &models[i % models.len()];
        let w = if model.continuous().and_then(|l| l.window.as_ref()).is_some() { &unit } else { &window };
        let mut sets: Vec<Set> = (0..3).map(|_| random_set(&mut rng, model, w)).collect();
        if i % 10 == 0 {
            // A null modification of the first set: same class, different representation.
            if let Some(r) = sets[0].region() {
                let line = Region::from_box(bx(qi(5), qi(5), qi(0), qi(1)));
                if let Ok(r2) = r.disjoint_union(&line) {
                    sets[2] = match &sets[0] {
                        Set::Pair(_, a) => Set::Pair(r2, a.clone()),
                        _ => Set::Region(r2),
                    };
                }
            } else {
                sets[2] = sets[0].clone();
            }
        }
        let d = |a: &Set, b: &Set| dist_sq(model, a, b).map_err(|e| e.to_string());
        let (ab, bc, ac) = (d(&sets[0], &sets[1])?, d(&sets[1], &sets[2])?, d(&sets[0], &sets[2])?);
        ensure(ab == d(&sets[1], &sets[0])?, || format!("triple {i}: asymmetric"))?;
        ensure(
            triangle_holds(&ab, &bc, &ac) && triangle_holds(&ab, &ac, &bc) && triangle_holds(&ac, &bc, &ab),
            || format!("triple {i}: triangle inequality fails for {ab}, {bc}, {ac}"),
        )?;
        // Independent symmetric-difference measure.
        let (x, z) = (&sets[0], &sets[2]);
        let mut sym = ExtendedRational::zero();
        if let (Some(l), Some(rx), Some(rz)) = (model.continuous(), x.region(), z.region()) {
            let (rx, rz) = match &l.window {
                Some(w) => (rx.clip(w), rz.clip(w)),
                None => (rx.clone(), rz.clone()),
            };
            sym = sym + fin(symdiff_measure(&rx, &rz).map_err(|e| e.to_string())?);
        }
        if let (Some(u), Some(ax), Some(az)) = (model.atoms(), x.atoms(), z.atoms()) {
            sym = sym + u.mass(&ax.symmetric_difference(az)).map_err(|e| e.to_string())?;
        }
        ensure(ac == sym, || format!("triple {i}: dist_sq {ac} vs symmetric difference {sym}"))?;
        ensure(ac.is_zero() == sym.is_zero(), || format!("triple {i}: null test disagrees"))?;
        ensure(d(x, x)?.is_zero(), || format!("triple {i}: d(A,A) != 0"))?;
        zeros += ac.is_zero() as usize;
    }
    Ok(format!("500 triples over 5 models; {zeros} null-distance pairs"))
}

fn corpus() -> Vec<(String, Region)> {
    let mut out = vec![
        ("unit box".to_string(), Region::from_box(AxisBox::unit(2))),
        ("strip [0,1/3)x[0,1)".into(), Region::from_box(bx(qi(0), q(1, 3), qi(0), qi(1)))),
        ("T_1".into(), make_tm(1).unwrap()),
        ("T_2".into(), make_tm(2).unwrap()),
        ("T_3".into(), make_tm(3).unwrap()),
        ("T_2^eps, eps_sq=1/64".into(), make_tm_eps(2, &q(1, 64)).unwrap()),
        ("T_3^eps, eps_sq=1/8".into(), make_tm_eps(3, &q(1, 8)).unwrap()),
        ("negative box".into(), Region::from_box(bx(q(-3, 2), q(-1, 3), q(-1, 5), q(1, 2)))),
    ];
    let mut rng = rng(8);
    let window = bx(qi(-1), qi(1), qi(-1), qi(1));
    for i in 0..12 {
        out.push((format!("random region {i}"), random_region(&mut rng, &window)));
    }
    out
}

/// Jordan bounds bracket exact measures at levels 0..=10; width at level 10 below 2^-5.
fn oracle_sandwich() -> Outcome {
    let mut widest = Q::from_integer(0.into());
    let limit = q(1, 32);
    for (name, r) in corpus() {
        let exact = r.measure();
        for l in 0..=10 {
            let j = jordan_bounds(&r, l).map_err(|e| format!("{name}: {e}"))?;
            ensure(j.lower <= exact && exact <= j.upper, || {
                format!("{name}, level {l}: [{}, {}] misses {exact}", j.lower, j.upper)
            })?;
            if l == 10 {
                let w = &j.upper - &j.lower;
                ensure(w < limit, || format!("{name}: level-10 width {w}"))?;
                widest = widest.max(w);
            }
        }
    }
    Ok(format!("20 corpus regions bracketed; widest level-10 gap {widest}"))
}

/// dist_sq(A_n, T_2) for the best level-n approximations, n = 1..=12.
fn completeness_proxy() -> Outcome {
    let model = unit_square();
    let t = Set::Region(make_tm(2).map_err(|e| e.to_string())?);
    let mut errors = Vec::new();
    for n in 1..=12 {
        let p = standard_filtration(&model, n).map_err(|e| e.to_string())?;
        let a = best_approximation(&model, &p, &t).map_err(|e| e.to_string())?;
        let d = dist_sq(&model, &a.approximant, &t).map_err(|e| e.to_string())?;
        ensure(d == a.error, || format!("level {n}: approximant at {d}, reported {}", a.error))?;
        errors.push(d);
    }
    let shown: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
    let strict = errors.windows(2).all(|w| w[1] < w[0]);
    let small = errors.last().unwrap() < &fin(q(1, 10_000));
    if strict && small {
        Ok(format!("errors {}", shown.join(", ")))
    } else {
        Err(format!(
            "errors {} (strictly decreasing: {strict}; below 1/10000 at n=12: {small})",
            shown.join(", ")
        ))
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("T_m law", tm_law),
        ("witness lower bound", witness_lower_bound),
        ("approximation optimality", approximation_optimality),
        ("dyadic approximation", dyadic_approximation),
        ("classifier", classifier),
        ("eps-net correctness", eps_net),
        ("metric axioms", metric_axioms),
        ("oracle sandwich", oracle_sandwich),
        ("completeness proxy", completeness_proxy),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.2}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.2}s] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
