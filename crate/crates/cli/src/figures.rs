//! Exponent curves for the built-in plots, as [`DataTable`]s.

use anyhow::Result;
use macexp::channels::{binary_example_channel, Dmc};
use macexp::curve::DataTable;
use macexp::gaussian::{
    db_to_linear, distributed_nesting_exponent, gallager_spherical_ub, gaussian_capacity, gaussian_critical_rate,
    gaussian_expurgation_rate, su_gaussian_best, GaussianMacParams,
};
use macexp::su_exponents::{
    capacity, critical_rate, expurgated_exponent, expurgation_rate, random_coding_exponent, slepian_wolf_mac_exponent,
    time_sharing_expurgated,
};
use macexp::transform::{virtual_exponent, TransformSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    Fig1,
    Fig2,
    Region,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig4d,
}

/// Uniform grid of `points` values on `[a, b]`.
fn grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .collect()
}

pub fn build(id: FigureId, resolution: usize, a1: f64, a2: f64) -> Result<DataTable> {
    match id {
        FigureId::Fig1 => fig1(resolution),
        FigureId::Fig2 => fig2(resolution),
        FigureId::Region => region(resolution, a1, a2),
        FigureId::Fig4a => fig4(resolution, 30.0, 27.0),
        FigureId::Fig4b => fig4(resolution, 50.0, 25.0),
        FigureId::Fig4c => fig4(resolution, 6.0, 3.0),
        FigureId::Fig4d => fig4(resolution, 10.0, 1.0),
    }
}

fn fig1(resolution: usize) -> Result<DataTable> {
    let ch = Dmc::bsc(0.02)?;
    let (c, _) = capacity(&ch);
    let mut t = DataTable::new(&["rate", "random_coding", "expurgated"])
        .with_meta("figure", "fig1")
        .with_meta("channel", "additive BSC, noise Bernoulli(0.02)")
        .with_meta("units", "nats")
        .with_meta("capacity", macexp::curve::fmt12(c))
        .with_meta("critical_rate", macexp::curve::fmt12(critical_rate(&ch)?))
        .with_meta("expurgation_rate", macexp::curve::fmt12(expurgation_rate(&ch)?));
    for r in grid(0.0, c, resolution) {
        t.push(vec![r, random_coding_exponent(&ch, r)?.e_r, expurgated_exponent(&ch, r)?.value]);
    }
    Ok(t)
}

fn fig2(resolution: usize) -> Result<DataTable> {
    let q = 0.1;
    let id = TransformSpec::binary_identity();
    let mut t = DataTable::new(&["p", "slepian_wolf", "virtual", "time_sharing"])
        .with_meta("figure", "fig2")
        .with_meta("q", q)
        .with_meta("rates", "r1 = r2 = 0")
        .with_meta("units", "nats");
    for p in grid(0.0, 1.0, resolution) {
        let mac = binary_example_channel(q, p)?;
        t.push(vec![
            p,
            slepian_wolf_mac_exponent(&mac, 0.0, 0.0)?.value,
            virtual_exponent(&mac, &id, 0.0)?,
            time_sharing_expurgated(&mac, 0.0, 0.0)?,
        ]);
    }
    Ok(t)
}

/// Boundaries over `r1`: the MAC capacity region, the structured region
/// `R1 + R2 <= ½ ln A1, R2 <= ½ ln A2`, and its expurgation part
/// `min(μ1, μ2) >= 4`. Zero means no rate pair with that `r1`.
fn region(resolution: usize, a1: f64, a2: f64) -> Result<DataTable> {
    GaussianMacParams::new(a1, a2, 0.0, 0.0)?;
    let cap1 = gaussian_capacity(a1);
    let cap2 = gaussian_capacity(a2);
    let capsum = gaussian_capacity(a1 + a2);
    let boundary = |r1: f64, b1: f64, b2: f64| {
        if r1 > b1 {
            0.0
        } else {
            (b1 - r1).min(b2).max(0.0)
        }
    };
    let mut t = DataTable::new(&["r1", "capacity_r2", "structured_r2", "expurgation_r2"])
        .with_meta("figure", "region")
        .with_meta("a1", macexp::curve::fmt12(a1))
        .with_meta("a2", macexp::curve::fmt12(a2))
        .with_meta("equal_mu_r1", macexp::curve::fmt12(0.5 * (a1 / a2).ln()))
        .with_meta("units", "nats");
    for r1 in grid(0.0, cap1, resolution) {
        let cap = if r1 > cap1 { 0.0 } else { (capsum - r1).min(cap2) };
        t.push(vec![
            r1,
            cap,
            boundary(r1, 0.5 * a1.ln(), 0.5 * a2.ln()),
            boundary(r1, 0.5 * (a1 / 4.0).ln(), 0.5 * (a2 / 4.0).ln()),
        ]);
    }
    Ok(t)
}

fn fig4(resolution: usize, a1_db: f64, a2_db: f64) -> Result<DataTable> {
    let (a1, a2) = (db_to_linear(a1_db), db_to_linear(a2_db));
    let r1 = 0.5 * (a1 / a2).ln();
    let full = 0.5 * a2.ln();
    let alpha_of = |rate_sum: f64| (rate_sum - r1) / full;
    let mut t = DataTable::new(&["alpha", "r2", "spherical_shell_ub", "distributed_nesting", "single_user"])
        .with_meta("a1_db", a1_db)
        .with_meta("a2_db", a2_db)
        .with_meta("r1", macexp::curve::fmt12(r1))
        .with_meta("alpha", "r2 / (0.5 ln a2)")
        .with_meta("su_critical_alpha", macexp::curve::fmt12(alpha_of(gaussian_critical_rate(a1 + a2)?)))
        .with_meta("su_expurgation_alpha", macexp::curve::fmt12(alpha_of(gaussian_expurgation_rate(a1 + a2)?)))
        .with_meta("units", "nats");
    for alpha in grid(0.0, 1.0, resolution) {
        let r2 = alpha * full;
        let dn = distributed_nesting_exponent(&GaussianMacParams::new(a1, a2, r1, r2)?).exponent;
        let (ub, _) = gallager_spherical_ub(r1 + r2, a1, a2)?;
        t.push(vec![alpha, r2, ub, dn, su_gaussian_best(r1 + r2, a1 + a2)?]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig4a_shows_a_gain_and_fig4c_does_not() {
        let a = build(FigureId::Fig4a, 11, 0.0, 0.0).unwrap();
        let ub = a.column("spherical_shell_ub").unwrap();
        let dn = a.column("distributed_nesting").unwrap();
        assert!(ub.iter().zip(&dn).any(|(u, d)| d > u));
        let c = build(FigureId::Fig4c, 11, 0.0, 0.0).unwrap();
        let ub = c.column("spherical_shell_ub").unwrap();
        let dn = c.column("distributed_nesting").unwrap();
        assert!(ub.iter().zip(&dn).all(|(u, d)| d <= u));
    }

    #[test]
    fn region_boundaries_are_nested() {
        let t = region(21, 1000.0, 500.0).unwrap();
        for row in &t.rows {
            assert!(row[3] <= row[2] && row[2] <= row[1], "{row:?}");
        }
    }

    #[test]
    fn fig1_curves_meet_at_capacity() {
        let t = fig1(5).unwrap();
        let last = t.rows.last().unwrap();
        assert!(last[1] < 1e-6 && last[2] < 1e-6);
    }
}
