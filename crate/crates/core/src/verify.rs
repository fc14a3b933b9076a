//! Seeded property suites over every module, producing machine-readable
//! reports.
//!
//! Each check reduces to one number compared against a tolerance; the
//! tolerance scale multiplies every tolerance, so a scale of 0 turns any
//! nonzero residual into a failure.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    check_linearization, coefficient_a, coefficient_b, crossover_solution, moebius_t, moebius_transform_all,
    product_flow_apply, product_flow_apply_ordered, product_flow_trajectory, rk4_integrate, semigroup_apply,
    DisjointStretchSystem, LinkRates,
};
use crate::error::{Error, Result};
use crate::generalized::{
    check_flow_commutation, check_generalized_ode, cyclic_apply, generalized_coefficients, generalized_flow_apply,
    gfun, gfun_asymptotic_check, gfun_derivative_residual, CyclicOperator,
};
use crate::lattice::{moebius_sign, partition_of, LinkSet};
use crate::measure::{marginal, random_probability_with, tensor, total_variation, tv_distance, Measure, ProductSpace};
use crate::recombinator::{check_gen_cond, lipschitz_ratio, recombine};

pub const SUITES: [&str; 4] = ["algebra", "semigroup", "moebius", "generalized"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Recorder {
    scale: f64,
    checks: Vec<Check>,
}

impl Recorder {
    /// Passes when `value ≤ tolerance · scale`; NaN never passes.
    fn le(&mut self, name: &str, value: f64, tolerance: f64) {
        let tolerance = tolerance * self.scale;
        self.checks.push(Check {
            name: name.to_string(),
            value,
            tolerance,
            passed: value <= tolerance,
        });
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// A space with between `min_nodes` and `caps.len()` nodes, node `i` having
/// between 2 and `caps[i]` states.
fn random_space(rng: &mut ChaCha8Rng, caps: &[usize], min_nodes: usize) -> ProductSpace {
    let n = rng.gen_range(min_nodes..=caps.len());
    let sizes = caps[..n].iter().map(|&c| rng.gen_range(2..=c)).collect();
    ProductSpace::new(sizes).expect("caps are valid")
}

fn random_signed(space: &ProductSpace, rng: &mut ChaCha8Rng) -> Measure {
    let w = (0..space.total_states()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Measure::new(space.clone(), w).expect("weights match the space")
}

/// Splits the links into consecutive segments and turns some of them into
/// components, each a random nonempty subset of its segment. Stretches of
/// different components are then disjoint.
fn random_disjoint_system(rng: &mut ChaCha8Rng, n_links: usize) -> DisjointStretchSystem {
    loop {
        let mut comps = Vec::new();
        let mut start = 0;
        while start < n_links {
            let end = rng.gen_range(start + 1..=n_links);
            if rng.gen_bool(0.7) {
                let seg: Vec<usize> = (start..end).collect();
                let mut pick: Vec<usize> = seg.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
                if pick.is_empty() {
                    pick.push(seg[rng.gen_range(0..seg.len())]);
                }
                let set = LinkSet::from_links(n_links, &pick).expect("links in range");
                comps.push((set, rng.gen_range(0.2..2.0)));
            }
            start = end;
        }
        if !comps.is_empty() {
            return DisjointStretchSystem::new(n_links, comps).expect("segments are disjoint");
        }
    }
}

fn random_rates(rng: &mut ChaCha8Rng, n_links: usize) -> LinkRates {
    LinkRates::new((0..n_links).map(|_| rng.gen_range(0.2..2.0)).collect()).expect("positive rates")
}

fn nonempty_subsets(n_links: usize) -> impl Iterator<Item = LinkSet> {
    LinkSet::all_subsets(n_links)
        .expect("small link count")
        .filter(|a| !a.is_empty())
}

fn lattice_checks(rec: &mut Recorder) {
    let mut duality = 0.0f64;
    let mut blocks = 0.0f64;
    let mut round_trip = 0.0f64;
    for n in 0..=6usize {
        let subsets: Vec<LinkSet> = LinkSet::all_subsets(n).unwrap().collect();
        for &a in &subsets {
            let pa = partition_of(a, n + 1).unwrap();
            if pa.blocks().len() != a.len() + 1 {
                blocks += 1.0;
            }
            if n <= 4 {
                for &b in &subsets {
                    let pb = partition_of(b, n + 1).unwrap();
                    if a.is_subset(b) != pb.refines(&pa) {
                        duality += 1.0;
                    }
                }
            }
        }
        // f(H) = bits + 1, transformed and inverted
        let f: Vec<f64> = subsets.iter().map(|h| f64::from(h.bits()) + 1.0).collect();
        let g: Vec<f64> = subsets
            .iter()
            .map(|&s| {
                s.supersets()
                    .map(|h| f64::from(moebius_sign(s, h).unwrap()) * f[h.bits() as usize])
                    .sum()
            })
            .collect();
        for &s in &subsets {
            let back: f64 = s.supersets().map(|h| g[h.bits() as usize]).sum();
            round_trip = round_trip.max((back - f[s.bits() as usize]).abs());
        }
    }
    rec.le("lattice.refinement_duality_violations", duality, 0.0);
    rec.le("lattice.block_count_violations", blocks, 0.0);
    rec.le("lattice.moebius_round_trip", round_trip, 1e-9);
}

fn measure_checks(rec: &mut Recorder, seed: u64) {
    let mut r = rng(seed, 1);
    let (mut nested, mut mass, mut linear, mut norm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let space = random_space(&mut r, &[3, 3, 2, 4, 2], 2);
        let n = space.n_nodes();
        let w = random_probability_with(&space, &mut r).scaled(r.gen_range(0.5..3.0));
        let v = random_signed(&space, &mut r);
        let outer: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.7)).collect();
        let outer = if outer.is_empty() { vec![0] } else { outer };
        let inner: Vec<usize> = outer.iter().copied().filter(|_| r.gen_bool(0.5)).collect();
        let inner = if inner.is_empty() { vec![outer[0]] } else { inner };
        let mi = marginal(&w, &outer).unwrap();
        let twice = marginal(&mi, &inner).unwrap();
        let once = marginal(&w, &inner).unwrap();
        nested = nested.max(tv_distance(&twice, &once) / w.mass());
        mass = mass.max((mi.mass() - w.mass()).abs() / w.mass());

        let (a, b) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let lhs = marginal(&w.lincomb(a, &v, b), &outer).unwrap();
        let rhs = mi.lincomb(a, &marginal(&v, &outer).unwrap(), b);
        linear = linear.max(tv_distance(&lhs, &rhs));

        let cut = r.gen_range(1..n);
        let left = marginal(&w, &(0..cut).collect::<Vec<_>>()).unwrap();
        let right = marginal(&w, &(cut..n).collect::<Vec<_>>()).unwrap();
        let t = tensor(&[left.clone(), right.clone()]).unwrap();
        let want = total_variation(&left) * total_variation(&right);
        norm = norm.max((total_variation(&t) - want).abs() / want);
    }
    rec.le("measure.marginal_consistency", nested, 1e-12);
    rec.le("measure.marginal_mass", mass, 1e-12);
    rec.le("measure.marginal_linearity", linear, 1e-12);
    rec.le("measure.tensor_norm_multiplicative", norm, 1e-12);
}

fn algebra(rec: &mut Recorder, seed: u64) {
    lattice_checks(rec);
    measure_checks(rec, seed);

    let mut r = rng(seed, 2);
    let (mut comp, mut idem, mut commute, mut norm, mut prob, mut blocks) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let space = random_space(&mut r, &[3, 2, 3, 2], 2);
        let n = space.n_links();
        let w = random_probability_with(&space, &mut r).scaled(r.gen_range(0.5..2.0));
        let all: Vec<LinkSet> = LinkSet::all_subsets(n).unwrap().collect();
        let rs: Vec<Measure> = all.iter().map(|&g| recombine(&w, g)).collect();
        for &g in &all {
            let rg = &rs[g.bits() as usize];
            for &h in &all {
                let lhs = recombine(&rs[h.bits() as usize], g);
                let rhs = &rs[g.union(h).unwrap().bits() as usize];
                comp = comp.max(tv_distance(&lhs, rhs) / w.mass());
            }
            idem = idem.max(tv_distance(&recombine(rg, g), rg) / w.mass());
            norm = norm.max((total_variation(rg) - total_variation(&w)).abs() / w.mass());
            prob = prob.max(-rg.min_weight());
            for block in partition_of(g, space.n_nodes()).unwrap().blocks() {
                let nodes: Vec<usize> = block.clone().collect();
                blocks =
                    blocks.max(tv_distance(&marginal(rg, &nodes).unwrap(), &marginal(&w, &nodes).unwrap()) / w.mass());
            }
        }
        for link_a in 0..n {
            for link_b in 0..n {
                let a = LinkSet::singleton(n, link_a).unwrap();
                let b = LinkSet::singleton(n, link_b).unwrap();
                let ab = recombine(&recombine(&w, b), a);
                let ba = recombine(&recombine(&w, a), b);
                commute = commute.max(tv_distance(&ab, &ba) / w.mass());
            }
        }
    }
    rec.le("recombinator.composition_law", comp, 1e-12);
    rec.le("recombinator.idempotency", idem, 1e-12);
    rec.le("recombinator.commutativity", commute, 1e-12);
    rec.le("recombinator.norm_preserved_on_positive", norm, 1e-12);
    rec.le("recombinator.positivity_preserved", prob, 0.0);
    rec.le("recombinator.block_marginals", blocks, 1e-12);

    let mut r = rng(seed, 3);
    let (mut homog, mut contraction) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let space = random_space(&mut r, &[3, 2, 3, 2], 2);
        let v = random_signed(&space, &mut r);
        for g in LinkSet::all_subsets(space.n_links()).unwrap() {
            let rv = recombine(&v, g);
            contraction = contraction.max(total_variation(&rv) / total_variation(&v) - 1.0);
            let a: f64 = r.gen_range(0.0..5.0);
            homog =
                homog.max(tv_distance(&recombine(&v.scaled(a), g), &rv.scaled(a)) / (1.0 + a * total_variation(&rv)));
        }
    }
    rec.le("recombinator.positive_homogeneity", homog, 1e-12);
    rec.le("recombinator.norm_contraction_excess", contraction, 1e-12);

    let mut r = rng(seed, 4);
    let mut gen = 0.0f64;
    for _ in 0..100 {
        let space = random_space(&mut r, &[3, 2, 3, 2], 2);
        let w = random_probability_with(&space, &mut r);
        for a in nonempty_subsets(space.n_links()) {
            for k in 0..=10 {
                gen = gen.max(check_gen_cond(&w, a, k as f64 / 10.0).unwrap());
            }
        }
    }
    rec.le("recombinator.mixing_fixed_point", gen, 1e-10);

    let mut r = rng(seed, 5);
    let mut lip = 0.0f64;
    for sizes in [vec![2, 2], vec![3, 2, 3, 2]] {
        let space = ProductSpace::new(sizes).unwrap();
        for link in 0..space.n_links() {
            for _ in 0..2000 {
                let w = random_signed(&space, &mut r);
                let v = random_signed(&space, &mut r);
                lip = lip.max(lipschitz_ratio(&w, &v, link).unwrap());
            }
        }
    }
    rec.le("recombinator.lipschitz_ratio", lip, 3.0 + 1e-9);
}

fn semigroup(rec: &mut Recorder, seed: u64) {
    let mut r = rng(seed, 10);
    let (mut gap, mut drift, mut neg) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let space = random_space(&mut r, &[3, 3, 2, 3, 2], 3);
        let sys = random_disjoint_system(&mut r, space.n_links());
        let w = random_probability_with(&space, &mut r);
        let num = rk4_integrate(&w, &sys.rate_map(), 5.0, 1e-3).unwrap();
        let exact = product_flow_trajectory(&w, &sys, num.times()).unwrap();
        gap = exact.gaps(&num).unwrap().into_iter().fold(gap, f64::max);
        drift = drift.max(num.max_mass_drift());
        neg = neg.max(-num.min_weight());
    }
    rec.le("semigroup.closed_form_vs_rk4", gap, 1e-6);
    rec.le("semigroup.rk4_mass_drift", drift, 1e-9);
    rec.le("semigroup.rk4_negative_weight", neg, 1e-9);

    let mut r = rng(seed, 11);
    let mut decay = 0.0f64;
    for _ in 0..50 {
        let space = random_space(&mut r, &[3, 2, 3, 2], 2);
        let w = random_probability_with(&space, &mut r);
        let subsets: Vec<LinkSet> = nonempty_subsets(space.n_links()).collect();
        let a = subsets[r.gen_range(0..subsets.len())];
        let rate: f64 = r.gen_range(0.2..2.0);
        let ra = recombine(&w, a);
        let base = tv_distance(&w, &ra);
        for t in [0.1, 1.0, 3.0] {
            let want = (-rate * t).exp() * base;
            let got = tv_distance(&semigroup_apply(&w, a, rate, t).unwrap(), &ra);
            decay = decay.max((got - want).abs() / want);
        }
    }
    rec.le("semigroup.exact_decay", decay, 1e-12);

    let mut r = rng(seed, 12);
    let (mut commute, mut law, mut bound) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let space = random_space(&mut r, &[3, 2, 3, 2, 2], 3);
        let n = space.n_links();
        let w = random_probability_with(&space, &mut r);
        let sys = loop {
            let s = random_disjoint_system(&mut r, n);
            if s.len() >= 2 {
                break s;
            }
        };
        let mut ts: Vec<f64> = (0..sys.len()).map(|_| r.gen_range(0.0..3.0)).collect();
        let forward: Vec<usize> = (0..sys.len()).collect();
        let backward: Vec<usize> = forward.iter().rev().copied().collect();
        let ab = product_flow_apply_ordered(&w, &sys, &ts, &forward).unwrap();
        let ba = product_flow_apply_ordered(&w, &sys, &ts, &backward).unwrap();
        commute = commute.max(tv_distance(&ab, &ba));

        let s = r.gen_range(0.0..2.0);
        let first = product_flow_apply(&w, &sys, &vec![s; sys.len()]).unwrap();
        let composed = product_flow_apply(&first, &sys, &ts).unwrap();
        ts.iter_mut().for_each(|t| *t += s);
        law = law.max(tv_distance(&composed, &product_flow_apply(&w, &sys, &ts).unwrap()));

        let limit = recombine(&w, sys.union());
        let c: f64 = sys.components().map(|(l, _)| tv_distance(&w, &recombine(&w, l))).sum();
        let rho = sys.min_rate().unwrap();
        for k in 0..=20 {
            let t = 0.5 * k as f64;
            let d = tv_distance(&product_flow_apply(&w, &sys, &vec![t; sys.len()]).unwrap(), &limit);
            bound = bound.max(d - c * (-rho * t).exp());
        }
    }
    rec.le("semigroup.commutativity", commute, 1e-12);
    rec.le("semigroup.semigroup_law", law, 1e-11);
    rec.le("semigroup.equilibrium_bound_excess", bound, 1e-15);
}

fn moebius(rec: &mut Recorder, seed: u64) {
    let mut r = rng(seed, 20);
    let (mut closed, mut vs_rk4, mut drift, mut neg, mut lin, mut sum_a, mut b_decay) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let grid: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
    for i in 0..10 {
        let n = 2 + i % 3;
        let sizes = (0..=n).map(|_| r.gen_range(2..=3)).collect();
        let space = ProductSpace::new(sizes).unwrap();
        let w = random_probability_with(&space, &mut r);
        let rates = random_rates(&mut r, n);
        let sys = rates.singleton_system();
        let num = rk4_integrate(&w, &sys.rate_map(), 5.0, 1e-3).unwrap();
        drift = drift.max(num.max_mass_drift());
        neg = neg.max(-num.min_weight());
        for (j, (&t, x)) in num.times().iter().zip(num.states()).enumerate() {
            if j % 25 != 0 && j + 1 != num.len() {
                continue;
            }
            let a = crossover_solution(&w, &rates, t).unwrap();
            let b = product_flow_apply(&w, &sys, &vec![t; n]).unwrap();
            closed = closed.max(tv_distance(&a, &b));
            vs_rk4 = vs_rk4.max(tv_distance(&a, x).max(tv_distance(&b, x)));
        }
        for g in LinkSet::all_subsets(n).unwrap() {
            lin = lin.max(check_linearization(&w, &rates, g, &grid).unwrap());
        }
        for &t in &grid {
            let s: f64 = LinkSet::all_subsets(n)
                .unwrap()
                .map(|g| coefficient_a(g, &rates, t).unwrap())
                .sum();
            sum_a = sum_a.max((s - 1.0).abs());
            for g in LinkSet::all_subsets(n).unwrap() {
                let want = (-t * rates.sum_over(g.complement())).exp();
                b_decay = b_decay.max((coefficient_b(g, &rates, t).unwrap() - want).abs());
            }
        }
    }
    rec.le("crossover.expansion_vs_product_flow", closed, 1e-10);
    rec.le("crossover.closed_forms_vs_rk4", vs_rk4, 1e-6);
    rec.le("crossover.rk4_mass_drift", drift, 1e-9);
    rec.le("crossover.rk4_negative_weight", neg, 1e-9);
    rec.le("moebius.linearization", lin, 1e-9);
    rec.le("crossover.coefficients_sum_to_one", sum_a, 1e-12);
    rec.le("crossover.partial_sums_decay", b_decay, 1e-12);

    let mut r = rng(seed, 21);
    let (mut fast, mut inversion) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let space = random_space(&mut r, &[3, 2, 2, 3, 2], 2);
        let w = random_probability_with(&space, &mut r);
        let all = moebius_transform_all(&w).unwrap();
        for g in LinkSet::all_subsets(space.n_links()).unwrap() {
            fast = fast.max(tv_distance(&moebius_t(&w, g).unwrap(), &all[g.bits() as usize]));
            let mut back = Measure::zeros(space.clone());
            for h in g.supersets() {
                back.axpy(1.0, &all[h.bits() as usize]);
            }
            inversion = inversion.max(tv_distance(&back, &recombine(&w, g)));
        }
    }
    rec.le("moebius.fast_transform_matches_direct", fast, 1e-12);
    rec.le("moebius.inversion", inversion, 1e-11);
}

fn generalized(rec: &mut Recorder, seed: u64) {
    let (mut hyper, mut sum, mut deriv, mut asym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for j in 0..=100 {
        let t = 0.1 * j as f64;
        hyper = hyper
            .max((gfun(2, 0, t).unwrap() - t.cosh()).abs() / t.cosh())
            .max(if t > 0.0 {
                (gfun(2, 1, t).unwrap() - t.sinh()).abs() / t.sinh()
            } else {
                gfun(2, 1, t).unwrap().abs()
            });
        for n in 2..=6 {
            let s: f64 = (0..n as i64).map(|k| gfun(n, k, t).unwrap()).sum();
            sum = sum.max((s - t.exp()).abs() / t.exp());
            if j % 10 == 0 {
                for k in 0..n as i64 {
                    deriv = deriv.max(gfun_derivative_residual(n, k, t, 1e-4).unwrap());
                }
            }
        }
    }
    let mut ratio_dev = 0.0f64;
    for n in 2..=6 {
        for k in 0..n as i64 {
            asym = asym.max(
                gfun_asymptotic_check(n, k, 30.0).unwrap() / (2.0 * (((2.0 * PI / n as f64).cos() - 1.0) * 30.0).exp()),
            );
            let r1 = gfun_derivative_residual(n, k, 3.0, 1e-2).unwrap();
            let r2 = gfun_derivative_residual(n, k, 3.0, 5e-3).unwrap();
            ratio_dev = ratio_dev.max((r1 / r2 - 4.0).abs());
        }
    }
    rec.le("gfun.hyperbolic_order_two", hyper, 1e-12);
    rec.le("gfun.sum_is_exponential", sum, 1e-10);
    rec.le("gfun.derivative_recurrence", deriv, 1e-6);
    rec.le("gfun.derivative_ratio_deviation_from_4", ratio_dev, 0.5);
    rec.le("gfun.asymptotic_relative_to_bound", asym, 1.0);

    let mut filter = 0.0f64;
    for n in 1..=8usize {
        for m in -40i64..=40 {
            let s: Complex64 = (0..n)
                .map(|j| Complex64::from_polar(1.0, 2.0 * PI * (j as i64 * m) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64;
            let want = if m.rem_euclid(n as i64) == 0 { 1.0 } else { 0.0 };
            filter = filter.max((s - want).norm());
        }
    }
    rec.le("gfun.root_of_unity_filter", filter, 1e-12);

    let mut min_coef = f64::INFINITY;
    let mut coef_sum = 0.0f64;
    for n in 2..=8 {
        for j in 0..=200 {
            let c = generalized_coefficients(n, 0.1 * j as f64).unwrap();
            min_coef = min_coef.min(c.iter().copied().fold(f64::INFINITY, f64::min));
            coef_sum = coef_sum.max((c.iter().sum::<f64>() - 1.0).abs());
        }
    }
    rec.le("generalized.coefficient_negativity", -min_coef, 1e-15);
    rec.le("generalized.coefficients_sum_to_one", coef_sum, 1e-12);

    let mut three = 0.0f64;
    for j in 0..=100 {
        let t = 0.1 * j as f64;
        let c = generalized_coefficients(2, t).unwrap();
        let e = (-t).exp();
        three = three
            .max((c[0] - e).abs())
            .max((c[1] - e * t.sinh()).abs())
            .max((c[2] - e * (t.cosh() - 1.0)).abs());
    }
    rec.le("generalized.three_term_coefficients", three, 1e-12);

    let mut r = rng(seed, 30);
    let (mut period, mut commute, mut mass, mut neg, mut limit, mut ode_ratio) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let ode_grid: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
    let cases: [(usize, Vec<usize>); 4] = [
        (2, vec![1, 0, 2]),
        (3, vec![1, 2, 0]),
        (4, vec![1, 0, 2]),
        (6, vec![2, 0, 1]),
    ];
    for (n, perm) in cases {
        let space = ProductSpace::new(vec![3, r.gen_range(2..=3), 2]).unwrap();
        let links = LinkSet::from_links(2, &[0]).unwrap();
        let op = CyclicOperator::new(&space, links, perm, n).unwrap();
        for _ in 0..5 {
            let w = random_probability_with(&space, &mut r);
            let rate = r.gen_range(0.3..2.0);
            let r1 = cyclic_apply(&w, &op, 1).unwrap();
            period = period.max(tv_distance(&cyclic_apply(&w, &op, n + 1).unwrap(), &r1));
            let lim = op.limit(&w).unwrap();
            let slow = 1f64.min(1.0 - (2.0 * PI / n as f64).cos());
            let c = (n + 1) as f64 * total_variation(&w);
            for k in 0..=20 {
                let t = 0.5 * k as f64;
                commute = commute.max(check_flow_commutation(&w, &op, rate, t).unwrap());
                let x = generalized_flow_apply(&w, &op, rate, t).unwrap();
                mass = mass.max((x.mass() - 1.0).abs());
                neg = neg.max(-x.min_weight());
                limit = limit.max(tv_distance(&x, &lim) - c * (-slow * rate * t).exp());
            }
            let e1 = check_generalized_ode(&w, &op, rate, &ode_grid, 1e-2).unwrap();
            let e2 = check_generalized_ode(&w, &op, rate, &ode_grid, 5e-3).unwrap();
            ode_ratio = ode_ratio.max((e1 / e2 - 4.0).abs());
        }
    }
    rec.le("cyclic.period", period, 1e-12);
    rec.le("generalized.flow_commutation", commute, 1e-10);
    rec.le("generalized.mass_preserved", mass, 1e-12);
    rec.le("generalized.negative_weight", neg, 1e-12);
    rec.le("generalized.long_time_bound_excess", limit, 1e-12);
    rec.le("generalized.ode_ratio_deviation_from_4", ode_ratio, 0.5);
}

/// Runs one suite (or `all`) from `seed`. Unknown names are an error.
pub fn run_suite(name: &str, seed: u64, tolerance_scale: f64) -> Result<Report> {
    if !(tolerance_scale.is_finite() && tolerance_scale >= 0.0) {
        return Err(Error::domain(format!(
            "tolerance scale {tolerance_scale} must be finite and nonnegative"
        )));
    }
    let mut rec = Recorder {
        scale: tolerance_scale,
        checks: Vec::new(),
    };
    let selected: Vec<&str> = match name {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    for suite in selected {
        match suite {
            "algebra" => algebra(&mut rec, seed),
            "semigroup" => semigroup(&mut rec, seed),
            "moebius" => moebius(&mut rec, seed),
            _ => generalized(&mut rec, seed),
        }
    }
    let passed = rec.checks.iter().all(|c| c.passed);
    Ok(Report {
        suite: name.to_string(),
        seed,
        tolerance_scale,
        checks: rec.checks,
        passed,
    })
}
