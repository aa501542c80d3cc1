//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use macexp::channels::{binary_example_channel, Dmc, Mac2, Pmf};
use macexp::gaussian::{
    distributed_nesting_exponent, gallager_spherical_ub, gaussian_critical_rate, gaussian_expurgation_rate,
    poltyrev_branch, poltyrev_exponent, random_coding_high_rate_branch, random_coding_low_rate_branch,
    su_gaussian_expurgated, su_gaussian_random_coding, GaussianMacParams,
};
use macexp::linear_codes::{exact_ml_error_probability, exact_split_mac_error_probability, random_full_rank_generator, split, TieRule};
use macexp::sim::{pam_error_probability, pam_sum_is_centered_pam, simulate_pam_mac, simulate_split_mac, PamTriplet, SimConfig};
use macexp::su_exponents::{best_known_exponent, capacity, expurgated_exponent, expurgation_rate, random_coding_exponent, slepian_wolf_mac_exponent};
use macexp::transform::{apply_transform, binary_gamma, independence_deviation, virtual_exponent, TransformSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_pmf(rng: &mut ChaCha8Rng, m: usize) -> Pmf<f64> {
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    Pmf::new(w.iter().map(|x| x / s).collect()).unwrap()
}

fn random_mac(rng: &mut ChaCha8Rng, x1: usize, x2: usize, y: usize) -> Mac2<f64> {
    let probs = (0..x1)
        .map(|_| (0..x2).map(|_| random_pmf(rng, y).probs().to_vec()).collect())
        .collect();
    Mac2::from_nested(probs).unwrap()
}

fn c1_poltyrev() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, mu) in [(1usize, 1.0f64), (2, 2.0), (3, 4.0)] {
        worst = worst.max((poltyrev_branch(i, mu) - poltyrev_branch(i + 1, mu)).abs());
    }
    let e4 = poltyrev_exponent(4.0).unwrap();
    let e8 = poltyrev_exponent(8.0).unwrap();
    check(
        worst < 1e-12 && e4 == 0.5 && e8 == 1.0,
        format!("max branch gap {worst:.2e}, E_P(4) = {e4}, E_P(8) = {e8}"),
    )
}

fn c2_split_joint() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0002);
    let mut mismatches = 0;
    let instances = 240;
    for i in 0..instances {
        let p = if i % 2 == 0 { 2 } else { 3 };
        let n = rng.gen_range(1..=10);
        let k = rng.gen_range(1..=n);
        let k1 = rng.gen_range(0..=k);
        let g = random_full_rank_generator(p, k, n, rng.gen()).unwrap();
        let noise = random_pmf(&mut rng, p);
        let rule = if i % 4 < 2 { TieRule::LexicographicMin } else { TieRule::CountAsError };
        let parent = exact_ml_error_probability(&g, &noise, rule).unwrap();
        let joint = exact_split_mac_error_probability(&split(&g, k1).unwrap(), &noise, rule).unwrap().joint;
        if joint.to_bits() != parent.to_bits() {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{instances} instances, {mismatches} not bit-identical"))
}

fn random_spec(rng: &mut ChaCha8Rng, m: usize, x1: usize, x2: usize, y: usize) -> TransformSpec {
    TransformSpec {
        m,
        f1: (0..m).map(|_| rng.gen_range(0..x1)).collect(),
        f2: (0..m).map(|_| rng.gen_range(0..x2)).collect(),
        k1: rng.gen_range(1..m),
        k2: rng.gen_range(1..m),
        g: (0..y).map(|_| rng.gen_range(0..m)).collect(),
    }
}

fn c3_independence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0003);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in 0..120 {
        let a = if i % 2 == 0 { 2 } else { 3 };
        let mac = random_mac(&mut rng, a, a, a);
        for m in [2, 3, 5] {
            let spec = random_spec(&mut rng, m, a, a, a);
            worst = worst.max(independence_deviation(&mac, &spec).unwrap());
            apply_transform(&mac, &spec).map_err(|e| e.to_string())?;
            count += 1;
        }
    }
    check(worst < 1e-12, format!("{count} (mac, spec) pairs, max deviation {worst:.2e}"))
}

fn c4_gamma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0004);
    let id = TransformSpec::binary_identity();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let mac = random_mac(&mut rng, 2, 2, 2);
        let enumerated = apply_transform(&mac, &id).unwrap().noise.get(1);
        worst = worst.max((binary_gamma(&mac).unwrap() - enumerated).abs());
    }
    let mut family: f64 = 0.0;
    for i in 0..=20 {
        for j in 0..=20 {
            let (q, p) = (i as f64 / 20.0, j as f64 / 20.0);
            let mac = binary_example_channel(q, p).unwrap();
            let closed = q + p / 2.0 - p * q;
            family = family.max((binary_gamma(&mac).unwrap() - closed).abs());
            family = family.max((apply_transform(&mac, &id).unwrap().noise.get(1) - closed).abs());
        }
    }
    check(
        worst < 1e-12 && family < 1e-12,
        format!("random MACs max gap {worst:.2e}, (q,p) family max gap {family:.2e}"),
    )
}

fn c5_fig2() -> Outcome {
    let q = 0.1;
    let id = TransformSpec::binary_identity();
    let virt = |p: f64| virtual_exponent(&binary_example_channel(q, p).unwrap(), &id, 0.0).unwrap();
    let sw = |p: f64| slepian_wolf_mac_exponent(&binary_example_channel(q, p).unwrap(), 0.0, 0.0).unwrap().value;
    let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0 * 0.975).collect();
    let v: Vec<f64> = grid.iter().map(|&p| virt(p)).collect();
    let s: Vec<f64> = grid.iter().map(|&p| sw(p)).collect();
    let monotone = v.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let bsc = best_known_exponent(&Dmc::bsc(q).unwrap(), 0.0).unwrap().e_best;
    let at_zero = (v[0] - bsc).abs();
    let cross = (1..grid.len()).find(|&i| v[i - 1] - s[i - 1] > 0.0 && v[i] - s[i] < 0.0);
    let Some(i) = cross else {
        return Err(format!(
            "no crossover found; monotone {monotone}, |E(0) - E_BSC| = {at_zero:.2e}, gap at p=0 {:.4}",
            v[0] - s[0]
        ));
    };
    let (mut lo, mut hi) = (grid[i - 1], grid[i]);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if virt(mid) > sw(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    check(
        monotone && at_zero < 1e-9,
        format!("non-increasing {monotone}, |E(0) - E_BSC(0.1)| = {at_zero:.2e}, crossover p* = {:.6}", 0.5 * (lo + hi)),
    )
}

fn c6_fig1() -> Outcome {
    let ch = Dmc::bsc(0.02).unwrap();
    let r_ex = expurgation_rate(&ch).unwrap();
    let (c, _) = capacity(&ch);
    let er = |r: f64| random_coding_exponent(&ch, r).unwrap().e_r;
    let ex = |r: f64| expurgated_exponent(&ch, r).unwrap().value;
    let below = (0..20).map(|i| r_ex * i as f64 / 20.0).all(|r| ex(r) > er(r));
    let tangency = (ex(r_ex) - er(r_ex)).abs();
    let above = (1..=40).map(|i| r_ex + (c - r_ex) * i as f64 / 40.0).all(|r| er(r) >= ex(r) - 1e-9);
    let at_cap = er(c).max(ex(c));
    check(
        below && tangency < 1e-6 && above && at_cap < 1e-6,
        format!(
            "R_ex = {r_ex:.6}, C = {c:.6}; ex > r below: {below}; gap at R_ex {tangency:.2e}; r >= ex above: {above}; max at C {at_cap:.2e}"
        ),
    )
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// `(alpha, E_DN, E_UB)` over `R2 = alpha * ½ ln A2` with `R1 = ½ ln(A1/A2)`.
fn fig4_sweep(a1_db: f64, a2_db: f64, points: usize) -> Vec<(f64, f64, f64)> {
    let (a1, a2) = (db(a1_db), db(a2_db));
    let r1 = 0.5 * (a1 / a2).ln();
    (0..points)
        .map(|i| {
            let alpha = i as f64 / (points - 1) as f64;
            let r2 = alpha * 0.5 * a2.ln();
            let dn = distributed_nesting_exponent(&GaussianMacParams::new(a1, a2, r1, r2).unwrap()).exponent;
            let ub = gallager_spherical_ub(r1 + r2, a1, a2).unwrap().0;
            (alpha, dn, ub)
        })
        .collect()
}

fn c7_fig4() -> Outcome {
    let high = fig4_sweep(30.0, 27.0, 101);
    let wins: Vec<f64> = high.iter().filter(|(_, dn, ub)| dn > ub).map(|t| t.0).collect();
    let low = fig4_sweep(6.0, 3.0, 101);
    let worst = low.iter().map(|(_, dn, ub)| dn - ub).fold(f64::NEG_INFINITY, f64::max);
    let interval = match (wins.first(), wins.last()) {
        (Some(a), Some(b)) => format!("E_DN > E_UB for alpha in [{a:.2}, {b:.2}] ({} points)", wins.len()),
        _ => "E_DN never above E_UB".into(),
    };
    check(
        !wins.is_empty() && worst <= 0.0,
        format!("30/27 dB: {interval}; 6/3 dB: max(E_DN - E_UB) = {worst:.4}"),
    )
}

fn c8_gaussian() -> Outcome {
    let mut worst_cont: f64 = 0.0;
    let mut worst_tan: f64 = 0.0;
    let mut zero_rate = true;
    for a in [1.0f64, 10.0, 1e3] {
        let rcr = gaussian_critical_rate(a).unwrap();
        worst_cont = worst_cont.max((random_coding_high_rate_branch(rcr, a) - random_coding_low_rate_branch(rcr, a)).abs());
        zero_rate &= su_gaussian_expurgated(0.0, a).unwrap() == a / 4.0;
        let rex = gaussian_expurgation_rate(a).unwrap();
        worst_tan = worst_tan.max((su_gaussian_expurgated(rex, a).unwrap() - su_gaussian_random_coding(rex, a).unwrap()).abs());
    }
    check(
        worst_cont < 1e-9 && zero_rate && worst_tan < 1e-6,
        format!("continuity gap at R_cr {worst_cont:.2e}; E_ex(0) = A/4 exact: {zero_rate}; gap at R_ex {worst_tan:.2e}"),
    )
}

fn c9_monte_carlo() -> Outcome {
    let g = random_full_rank_generator(2, 3, 7, 2024).unwrap();
    let noise = Pmf::bernoulli(0.08).unwrap();
    let rule = TieRule::CountAsError;
    let exact = exact_ml_error_probability(&g, &noise, rule).unwrap();
    let sc = split(&g, 1).unwrap();
    let trials = 4000;
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    let inside = (0..100u64)
        .filter(|&seed| {
            let cfg = SimConfig::new(trials, seed).unwrap().with_tie_rule(rule);
            let est = simulate_split_mac(&sc, &noise, &cfg).unwrap();
            (est.estimate - exact).abs() < 3.0 * sigma
        })
        .count();

    let t = PamTriplet::new(15, 3, 1.0).unwrap();
    let std = t.step() / 4.0;
    let run = simulate_pam_mac(&t, std, &SimConfig::new(200_000, 7).unwrap()).unwrap();
    let oracle = pam_error_probability(15, t.step(), std);
    let pam_sigma = run.joint.sigma_at(oracle);
    let pam_ok = (run.joint.estimate - oracle).abs() < 3.0 * pam_sigma && run.mismatches == 0;
    check(
        inside >= 99 && pam_ok,
        format!(
            "split code: {inside}/100 seeds within 3 sigma of {exact:.5}; PAM: {:.5} vs Q-oracle {oracle:.5} ({:.2} sigma), {} paired mismatches",
            run.joint.estimate,
            (run.joint.estimate - oracle).abs() / pam_sigma,
            run.mismatches
        ),
    )
}

fn c10_pam_structure() -> Outcome {
    let mut count = 0;
    let mut bad = Vec::new();
    for l1 in (1..=10_000u64).step_by(2) {
        for r in (1..=10_000 / l1).step_by(2) {
            let t = PamTriplet::new(l1 * r, l1, 1.0).unwrap();
            count += 1;
            if !pam_sum_is_centered_pam(&t) {
                bad.push((l1 * r, l1));
            }
        }
    }
    check(bad.is_empty(), format!("{count} triplets with l0 <= 10^4, {} failures", bad.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("poltyrev branch continuity", c1_poltyrev),
        ("split/joint equivalence", c2_split_joint),
        ("transformation independence", c3_independence),
        ("binary gamma consistency", c4_gamma),
        ("virtual vs Slepian-Wolf shape", c5_fig2),
        ("BSC(0.02) random-coding vs expurgated", c6_fig1),
        ("distributed nesting vs spherical shells", c7_fig4),
        ("Gaussian single-user consistency", c8_gaussian),
        ("Monte Carlo calibration", c9_monte_carlo),
        ("PAM sum structure", c10_pam_structure),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name} [{secs:.2}s]: {detail}", i + 1);
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
