//! Finite-support signals: plausibility, privacy and frontier checks, and
//! decomposition of a feasible posterior into extreme ones.

#![allow(clippy::needless_range_loop)]

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::feasible::{is_extreme, is_member, Budget, Posterior, Prior};
use crate::graph::Graph;
use crate::linalg;
use crate::rational::{self, Rational};
use crate::semichain::enumerate_extreme_posteriors;

/// A distribution over posteriors with positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signal {
    support: Vec<Posterior>,
    weights: Vec<Rational>,
}

impl Signal {
    pub fn new(support: Vec<Posterior>, weights: Vec<Rational>) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(Error::InvalidSignal(format!(
                "{} posteriors with {} weights",
                support.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidSignal("weights must be positive".into()));
        }
        if !weights.iter().sum::<Rational>().is_one() {
            return Err(Error::InvalidSignal("weights must sum to 1".into()));
        }
        let dim = support[0].len();
        if support.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidSignal("posteriors differ in length".into()));
        }
        let distinct: HashSet<&Posterior> = support.iter().collect();
        if distinct.len() != support.len() {
            return Err(Error::InvalidSignal("support repeats a posterior".into()));
        }
        Ok(Self { support, weights })
    }

    /// The signal that reveals nothing.
    pub fn point(mu: Posterior) -> Self {
        Self { support: vec![mu], weights: vec![Rational::one()] }
    }

    pub fn support(&self) -> &[Posterior] {
        &self.support
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `sum_k weight_k * mu_k`.
    pub fn barycenter(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.support[0].len()];
        for (mu, w) in self.support.iter().zip(&self.weights) {
            for (acc, p) in out.iter_mut().zip(mu.probs()) {
                *acc += w * p;
            }
        }
        out
    }
}

/// The weighted average of the support equals the prior exactly.
pub fn bayes_plausible(s: &Signal, prior: &Prior) -> bool {
    s.support[0].len() == prior.len() && s.barycenter() == prior.probs()
}

/// Every support posterior is feasible.
pub fn is_privacy_preserving(s: &Signal, g: &Graph, prior: &Prior, b: &Budget) -> Result<bool> {
    if !bayes_plausible(s, prior) {
        return Err(Error::NotBayesPlausible);
    }
    Ok(s.support.iter().all(|mu| is_member(mu, prior, g, b)))
}

/// Every support posterior is an extreme point of the feasible set.
///
/// At `t = 1` the only feasible point is the prior, which is then its own
/// extreme point.
pub fn is_frontier(s: &Signal, g: &Graph, prior: &Prior, b: &Budget) -> Result<bool> {
    if !is_privacy_preserving(s, g, prior, b)? {
        return Err(Error::NotPrivacyPreserving);
    }
    if b.is_degenerate() {
        return Ok(true);
    }
    for mu in &s.support {
        if !is_extreme(mu, prior, g, b)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A signal on extreme posteriors whose barycenter is `mu`.
pub fn decompose_into_extremes(mu: &Posterior, g: &Graph, prior: &Prior, b: &Budget) -> Result<Signal> {
    if !is_member(mu, prior, g, b) {
        return Err(Error::NotMember);
    }
    if b.is_degenerate() {
        return Ok(Signal::point(mu.clone()));
    }
    let vertices = enumerate_extreme_posteriors(g, prior, b)?.posteriors();
    decompose_over(mu, &vertices)
}

/// Writes `mu` as a convex combination of at most `J` of the given points.
///
/// Solves `sum_k lambda_k v_k = mu, lambda >= 0` by a Phase-I simplex with
/// Bland's rule (the normalization row is implied by the coordinate rows),
/// then applies Carathéodory reduction. A floating-point run of the same
/// simplex proposes a basis first; it is accepted only if the exact solve of
/// that basis is nonnegative, and the exact simplex runs otherwise.
pub fn decompose_over(mu: &Posterior, points: &[Posterior]) -> Result<Signal> {
    if let Some(k) = points.iter().position(|v| v == mu) {
        return Ok(Signal::point(points[k].clone()));
    }
    let lambda = match float_basis(mu, points).and_then(|basis| certify_basis(mu, points, &basis)) {
        Some(lambda) => lambda,
        None => phase_one(mu, points)?,
    };
    let mut support: Vec<usize> = (0..points.len()).filter(|&k| lambda[k].is_positive()).collect();
    let mut weights: Vec<Rational> = support.iter().map(|&k| lambda[k].clone()).collect();
    caratheodory_reduce(points, &mut support, &mut weights);
    let signal = Signal::new(support.iter().map(|&k| points[k].clone()).collect(), weights)?;
    if signal.barycenter() != mu.probs() {
        return Err(Error::Invariant("decomposition does not reproduce the posterior".into()));
    }
    Ok(signal)
}

/// Final Phase-I basis of a floating-point run, or `None` if it did not reach zero.
fn float_basis(mu: &Posterior, points: &[Posterior]) -> Option<Vec<usize>> {
    const TOL: f64 = 1e-11;
    let rows = mu.len();
    let cols = points.len();
    let width = cols + rows + 1;
    let mut tab: Vec<Vec<f64>> = (0..rows)
        .map(|r| {
            let mut row = vec![0.0; width];
            for (k, v) in points.iter().enumerate() {
                row[k] = rational::to_f64(&v.probs()[r]);
            }
            row[cols + r] = 1.0;
            row[width - 1] = rational::to_f64(&mu.probs()[r]);
            row
        })
        .collect();
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    let mut cost = vec![0.0; width];
    for row in &tab {
        for c in (0..cols).chain([width - 1]) {
            cost[c] -= row[c];
        }
    }
    for _ in 0..50 * width {
        let Some(enter) = (0..width - 1).find(|&c| cost[c] < -TOL) else {
            return (cost[width - 1].abs() < 1e-9).then_some(basis);
        };
        let pr = (0..rows)
            .filter(|&r| tab[r][enter] > TOL)
            .min_by(|&a, &b| {
                let (ra, rb) = (tab[a][width - 1] / tab[a][enter], tab[b][width - 1] / tab[b][enter]);
                ra.total_cmp(&rb).then(basis[a].cmp(&basis[b]))
            })?;
        let inv = 1.0 / tab[pr][enter];
        tab[pr].iter_mut().for_each(|x| *x *= inv);
        let pivot_row = tab[pr].clone();
        for (r, row) in tab.iter_mut().enumerate() {
            let f = row[enter];
            if r != pr && f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
            }
        }
        let f = cost[enter];
        cost.iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
        basis[pr] = enter;
    }
    None
}

/// Exact weights for a proposed basis, if they are nonnegative and use no artificial column.
fn certify_basis(mu: &Posterior, points: &[Posterior], basis: &[usize]) -> Option<Vec<Rational>> {
    let rows = mu.len();
    let cols = points.len();
    let column = |c: usize, r: usize| -> Rational {
        if c < cols {
            points[c].probs()[r].clone()
        } else if c - cols == r {
            Rational::one()
        } else {
            Rational::zero()
        }
    };
    let a: Vec<Vec<Rational>> = (0..rows).map(|r| basis.iter().map(|&c| column(c, r)).collect()).collect();
    let x = linalg::solve(a, mu.probs().to_vec())?;
    if x.iter().any(|v| v.is_negative()) {
        return None;
    }
    let mut lambda = vec![Rational::zero(); cols];
    for (&c, v) in basis.iter().zip(x) {
        if c < cols {
            lambda[c] = v;
        } else if !v.is_zero() {
            return None;
        }
    }
    Some(lambda)
}

/// Feasible `lambda` for `sum_k lambda_k v_k = mu`, `lambda >= 0`.
fn phase_one(mu: &Posterior, points: &[Posterior]) -> Result<Vec<Rational>> {
    let rows = mu.len();
    let cols = points.len();
    if points.iter().any(|v| v.len() != rows) {
        return Err(Error::DimensionMismatch { expected: rows, got: points.iter().map(Posterior::len).max().unwrap_or(0) });
    }
    // Columns 0..cols are lambda, cols..cols+rows artificial; last column is the right-hand side.
    let width = cols + rows + 1;
    let mut tab: Vec<Vec<Rational>> = (0..rows)
        .map(|r| {
            let mut row = vec![Rational::zero(); width];
            for (k, v) in points.iter().enumerate() {
                row[k] = v.probs()[r].clone();
            }
            row[cols + r] = Rational::one();
            row[width - 1] = mu.probs()[r].clone();
            row
        })
        .collect();
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    // Reduced costs of minimizing the sum of artificials.
    let mut cost = vec![Rational::zero(); width];
    for row in &tab {
        for c in 0..width {
            if c < cols || c == width - 1 {
                cost[c] -= &row[c];
            }
        }
    }
    while let Some(enter) = (0..width - 1).find(|&c| cost[c].is_negative()) {
        let mut leave: Option<usize> = None;
        for r in 0..rows {
            if !tab[r][enter].is_positive() {
                continue;
            }
            let ratio = &tab[r][width - 1] / &tab[r][enter];
            leave = match leave {
                None => Some(r),
                Some(best) => {
                    let best_ratio = &tab[best][width - 1] / &tab[best][enter];
                    if ratio < best_ratio || (ratio == best_ratio && basis[r] < basis[best]) {
                        Some(r)
                    } else {
                        Some(best)
                    }
                }
            };
        }
        let Some(pr) = leave else {
            return Err(Error::Invariant("phase-one objective is unbounded".into()));
        };
        let inv = tab[pr][enter].recip();
        for c in 0..width {
            tab[pr][c] = &tab[pr][c] * &inv;
        }
        let pivot_row = tab[pr].clone();
        for (r, row) in tab.iter_mut().enumerate() {
            if r != pr && !row[enter].is_zero() {
                let f = row[enter].clone();
                for c in 0..width {
                    if !pivot_row[c].is_zero() {
                        row[c] -= &f * &pivot_row[c];
                    }
                }
            }
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for c in 0..width {
                if !pivot_row[c].is_zero() {
                    cost[c] -= &f * &pivot_row[c];
                }
            }
        }
        basis[pr] = enter;
    }
    // cost[rhs] holds minus the objective value.
    if !cost[width - 1].is_zero() {
        return Err(Error::InfeasibleDecomposition);
    }
    let mut lambda = vec![Rational::zero(); cols];
    for (r, &v) in basis.iter().enumerate() {
        if v < cols {
            lambda[v] = tab[r][width - 1].clone();
        }
    }
    Ok(lambda)
}

/// Shrinks the support to at most `J` points, keeping the barycenter.
///
/// While more than `J` points remain, a kernel vector `alpha` of their
/// coordinate matrix has coordinates summing to zero, so moving the weights
/// along `-alpha` until one vanishes keeps both the barycenter and the total.
pub fn caratheodory_reduce(points: &[Posterior], support: &mut Vec<usize>, weights: &mut Vec<Rational>) {
    let Some(&first) = support.first() else {
        return;
    };
    let dim = points[first].len();
    while support.len() > dim {
        let matrix: Vec<Vec<Rational>> =
            (0..dim).map(|r| support.iter().map(|&k| points[k].probs()[r].clone()).collect()).collect();
        let mut alpha = linalg::kernel_vector(&matrix, support.len()).expect("more columns than rows");
        if !alpha.iter().any(|a| a.is_positive()) {
            alpha.iter_mut().for_each(|a| *a = -a.clone());
        }
        let step = alpha
            .iter()
            .zip(weights.iter())
            .filter(|(a, _)| a.is_positive())
            .map(|(a, w)| w / a)
            .min()
            .expect("a positive entry exists");
        for (w, a) in weights.iter_mut().zip(&alpha) {
            *w -= &step * a;
        }
        let keep: Vec<bool> = weights.iter().map(|w| w.is_positive()).collect();
        let mut k = 0;
        support.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        weights.retain(|w| w.is_positive());
    }
}

/// A random convex combination of up to `terms` distinct points with small integer weights.
pub fn random_convex_combination<R: Rng + ?Sized>(points: &[Posterior], terms: usize, rng: &mut R) -> Posterior {
    assert!(!points.is_empty(), "no points to combine");
    let dim = points[0].len();
    let mut acc = vec![Rational::zero(); dim];
    let mut total = Rational::zero();
    for _ in 0..terms.max(1) {
        let v = &points[rng.gen_range(0..points.len())];
        let w = Rational::from_integer(rng.gen_range(1..=16).into());
        for (a, p) in acc.iter_mut().zip(v.probs()) {
            *a += &w * p;
        }
        total += w;
    }
    Posterior::new(acc.into_iter().map(|a| a / &total).collect()).expect("convex combination of distributions")
}
