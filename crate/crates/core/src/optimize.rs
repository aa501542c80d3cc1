//! Small derivative-free maximizers used by the exponent computations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

/// Number of coarse grid points scanned before golden-section refinement.
pub const COARSE_GRID: usize = 64;

const SIMPLEX_SEED: u64 = 0x5eed_0f_51_3913;
const RANDOM_STARTS: usize = 5;

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while hi - lo > tol && iters < 300 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
        iters += 1;
    }
    // endpoints matter when the optimum sits on the boundary
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Scan `points` equally spaced abscissae of `[a, b]`, then refine the best
/// bracket with golden-section search.
pub fn grid_then_golden<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, points: usize, tol: T) -> (T, T) {
    let points = points.max(3);
    let step = (b - a) / T::from_usize_lossy(points - 1);
    let mut best_i = 0;
    let mut best_v = T::neg_infinity();
    for i in 0..points {
        let x = if i == points - 1 { b } else { a + step * T::from_usize_lossy(i) };
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let lo = if best_i == 0 { a } else { a + step * T::from_usize_lossy(best_i - 1) };
    let hi = if best_i + 1 >= points { b } else { a + step * T::from_usize_lossy(best_i + 1) };
    let (x, v) = golden_max(&f, lo, hi, tol);
    if v >= best_v {
        (x, v)
    } else {
        let x = if best_i == points - 1 { b } else { a + step * T::from_usize_lossy(best_i) };
        (x, best_v)
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (j, &uj) in u.iter().enumerate() {
        cumsum = cumsum + uj;
        let t = (cumsum - T::one()) / T::from_usize_lossy(j + 1);
        if uj - t > T::zero() {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(T::zero())).collect()
}

/// Maximize `f` over the probability simplex of dimension `dim`.
///
/// Binary alphabets are handled by a one-dimensional grid + golden search.
/// Larger alphabets use projected gradient ascent (central-difference
/// gradients, backtracking step) from the uniform point and a fixed set of
/// seeded random starts, stopping when an accepted step improves the objective
/// by less than `tol`.
pub fn maximize_on_simplex<T: Real, F: Fn(&[T]) -> T>(f: F, dim: usize, tol: T) -> (Vec<T>, T) {
    assert!(dim >= 1);
    if dim == 1 {
        let p = vec![T::one()];
        let v = f(&p);
        return (p, v);
    }
    if dim == 2 {
        let (a, v) = grid_then_golden(|a| f(&[a, T::one() - a]), T::zero(), T::one(), COARSE_GRID, T::lit(1e-10));
        return (vec![a, T::one() - a], v);
    }
    let uniform = vec![T::one() / T::from_usize_lossy(dim); dim];
    let mut starts = vec![uniform];
    let mut rng = ChaCha8Rng::seed_from_u64(SIMPLEX_SEED);
    for _ in 0..RANDOM_STARTS {
        // flat Dirichlet via normalized exponentials
        let e: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = e.iter().sum();
        starts.push(e.iter().map(|x| T::lit(x / s)).collect());
    }
    let mut best: Option<(Vec<T>, T)> = None;
    for s in starts {
        let cand = projected_gradient(&f, s, tol);
        if best.as_ref().map_or(true, |b| cand.1 > b.1) {
            best = Some(cand);
        }
    }
    best.expect("at least one start")
}

fn projected_gradient<T: Real, F: Fn(&[T]) -> T>(f: &F, start: Vec<T>, tol: T) -> (Vec<T>, T) {
    let h = T::epsilon().cbrt();
    let mut x = start;
    let mut fx = f(&x);
    let mut step = T::one();
    let min_step = T::lit(1e-14);
    for _ in 0..2000 {
        let grad: Vec<T> = (0..x.len())
            .map(|i| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] = xp[i] + h;
                xm[i] = (xm[i] - h).max(T::zero());
                let denom = xp[i] - xm[i];
                (f(&xp) - f(&xm)) / denom
            })
            .collect();
        let mut accepted = false;
        let mut gain = T::zero();
        while step > min_step {
            let trial: Vec<T> = x.iter().zip(&grad).map(|(&xi, &gi)| xi + step * gi).collect();
            let y = project_to_simplex(&trial);
            let fy = f(&y);
            if fy > fx {
                gain = fy - fx;
                x = y;
                fx = fy;
                accepted = true;
                step = step * T::lit(2.0);
                break;
            }
            step = step * T::lit(0.5);
        }
        if !accepted || gain < tol {
            break;
        }
    }
    (x, fx)
}
