//! Isotropic Cosserat energy densities and a finite-difference shell energy minimizer.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Deriv;
use crate::scalar::Real;
use crate::surface::{surf_frames, SurfacePatch};
use crate::tensor::{axl_of_skew_part, Mat3, Quat, Vec3};

/// Material constants of the isotropic energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParams<T> {
    pub mu: T,
    pub kappa: T,
    pub mu_c: T,
    pub lc: T,
    pub a1: T,
    pub a2: T,
    pub a3: T,
    pub p: T,
}

impl<T: Real> EnergyParams<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(mu: T, kappa: T, mu_c: T, lc: T, a1: T, a2: T, a3: T, p: T) -> Result<Self> {
        let params = EnergyParams {
            mu,
            kappa,
            mu_c,
            lc,
            a1,
            a2,
            a3,
            p,
        };
        params.validate()?;
        Ok(params)
    }

    /// All moduli one, `L_c = 1`, `p = 2`.
    pub fn unit() -> Self {
        let one = T::one();
        EnergyParams {
            mu: one,
            kappa: one,
            mu_c: one,
            lc: one,
            a1: one,
            a2: one,
            a3: one,
            p: T::two(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu", self.mu),
            ("kappa", self.kappa),
            ("mu_c", self.mu_c),
            ("lc", self.lc),
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
        ];
        for (name, v) in positive {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.p >= T::two() && self.p.is_finite()) {
            return Err(Error::InvalidParams(format!("p must be at least 2, got {}", self.p)));
        }
        Ok(())
    }

    /// The shell energy is quadratic and needs `p = 2`.
    pub fn validate_shell(&self) -> Result<()> {
        self.validate()?;
        if self.p != T::two() {
            return Err(Error::InvalidParams(format!(
                "shell energy requires p = 2, got {}",
                self.p
            )));
        }
        Ok(())
    }
}

fn dev_sym<T: Real>(x: &Mat3<T>) -> Mat3<T> {
    x.sym().dev()
}

fn curvature_quadratic<T: Real>(d: &Mat3<T>, p: &EnergyParams<T>) -> T {
    let tr = d.trace();
    p.a1 * dev_sym(d).norm_squared() + p.a2 * d.skew().norm_squared() + p.a3 * tr * tr
}

fn strain_part<T: Real>(e: &Mat3<T>, p: &EnergyParams<T>) -> T {
    let tr = e.trace();
    p.mu * dev_sym(e).norm_squared() + p.mu_c * e.skew().norm_squared() + p.kappa * T::half() * tr * tr
}

fn density<T: Real>(e: &Mat3<T>, d: &Mat3<T>, p: &EnergyParams<T>) -> T {
    let q = curvature_quadratic(d, p);
    strain_part(e, p) + p.mu * p.lc.powf(p.p) * q.powf(p.p * T::half())
}

/// `W(Ē, D̄)` of the three-dimensional body.
pub fn energy_3d<T: Real>(e: &Mat3<T>, d: &Mat3<T>, params: &EnergyParams<T>) -> Result<T> {
    params.validate()?;
    Ok(density(e, d, params))
}

/// `W(Eₑ, Dₑ)` of the shell, quadratic in both arguments.
pub fn energy_shell<T: Real>(e: &Mat3<T>, d: &Mat3<T>, params: &EnergyParams<T>) -> Result<T> {
    params.validate_shell()?;
    Ok(density(e, d, params))
}

/// `(∂W/∂E, ∂W/∂D)`.
pub fn energy_gradient<T: Real>(e: &Mat3<T>, d: &Mat3<T>, params: &EnergyParams<T>) -> (Mat3<T>, Mat3<T>) {
    let p = params;
    let two = T::two();
    let ge = dev_sym(e).scale(two * p.mu) + e.skew().scale(two * p.mu_c) + Mat3::identity().scale(p.kappa * e.trace());
    let dq = dev_sym(d).scale(two * p.a1) + d.skew().scale(two * p.a2) + Mat3::identity().scale(two * p.a3 * d.trace());
    let q = curvature_quadratic(d, p);
    let half_p = p.p * T::half();
    let outer = if half_p == T::one() {
        T::one()
    } else if q == T::zero() {
        T::zero()
    } else {
        half_p * q.powf(half_p - T::one())
    };
    (ge, dq.scale(p.mu * p.lc.powf(p.p) * outer))
}

/// Discrete shell state on an `n₁ × n₂` node grid, node `(i, j)` at index `i + n₁ j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellState<T> {
    pub n1: usize,
    pub n2: usize,
    pub m: Vec<Vec3<T>>,
    pub q: Vec<Quat<T>>,
    /// `true` where the position is held fixed.
    pub fixed_m: Vec<bool>,
    /// `true` where the rotation is held fixed.
    pub fixed_q: Vec<bool>,
}

impl<T: Real> ShellState<T> {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.n1 * j
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        let (i, j) = (k % self.n1, k / self.n1);
        i == 0 || j == 0 || i + 1 == self.n1 || j + 1 == self.n2
    }

    /// Replaces interior rotations by `exp(θ) Q` with `|θ| = amplitude` about a seeded random axis.
    pub fn perturb_rotations(&mut self, amplitude: T, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..self.q.len() {
            let axis = loop {
                let v = Vec3::new(
                    T::lit(rng.gen_range(-1.0..1.0)),
                    T::lit(rng.gen_range(-1.0..1.0)),
                    T::lit(rng.gen_range(-1.0..1.0)),
                );
                let n = v.norm();
                if n > T::lit(1e-3) && n <= T::one() {
                    break v.scale(T::one() / n);
                }
            };
            if !self.fixed_q[k] {
                self.q[k] = Quat::exp(axis.scale(amplitude)).mul(&self.q[k]).normalized();
            }
        }
    }

    /// Applies `m ↦ R m + c`, `Q ↦ R Q` to every node.
    pub fn rigid_motion(&self, r: &Quat<T>, c: Vec3<T>) -> Self {
        let rm = r.to_mat();
        let mut out = self.clone();
        for k in 0..self.m.len() {
            out.m[k] = rm * self.m[k] + c;
            out.q[k] = r.mul(&self.q[k]).normalized();
        }
        out
    }

    /// Number of free scalar unknowns.
    pub fn free_dofs(&self) -> usize {
        3 * (self.fixed_m.iter().filter(|f| !**f).count() + self.fixed_q.iter().filter(|f| !**f).count())
    }
}

/// Per-node geometry and the finite-difference stencils of the grid.
pub struct DiscreteShell<T: Real> {
    pub patch: Arc<dyn SurfacePatch<T>>,
    pub n1: usize,
    pub n2: usize,
    pub h: [T; 2],
    pub params: EnergyParams<T>,
    reference: Vec<Vec3<T>>,
    contra: Vec<[Vec3<T>; 2]>,
    first_fundamental: Vec<Mat3<T>>,
    /// Quadrature weight times the area element.
    weight: Vec<T>,
    stencil: Vec<[Vec<(usize, T)>; 2]>,
}

/// Coefficients of the second-order derivative along one grid line at position `i` of `n`.
fn line_stencil<T: Real>(i: usize, n: usize, h: T) -> Vec<(usize, T)> {
    let inv = T::one() / (T::two() * h);
    if i == 0 {
        vec![(0, -T::three() * inv), (1, T::lit(4.0) * inv), (2, -inv)]
    } else if i + 1 == n {
        vec![(n - 1, T::three() * inv), (n - 2, -T::lit(4.0) * inv), (n - 3, inv)]
    } else {
        vec![(i + 1, inv), (i - 1, -inv)]
    }
}

impl<T: Real> DiscreteShell<T> {
    pub fn new(patch: Arc<dyn SurfacePatch<T>>, n1: usize, n2: usize, params: EnergyParams<T>) -> Result<Self> {
        params.validate_shell()?;
        if n1 < 3 || n2 < 3 {
            return Err(Error::InvalidParams(format!(
                "grid needs at least 3×3 nodes, got {n1}×{n2}"
            )));
        }
        let dom = patch.domain();
        let h = [
            (dom.hi[0] - dom.lo[0]) / T::lit((n1 - 1) as f64),
            (dom.hi[1] - dom.lo[1]) / T::lit((n2 - 1) as f64),
        ];
        let n = n1 * n2;
        let mut reference = Vec::with_capacity(n);
        let mut contra = Vec::with_capacity(n);
        let mut first_fundamental = Vec::with_capacity(n);
        let mut weight = Vec::with_capacity(n);
        let mut stencil = Vec::with_capacity(n);
        for k in 0..n {
            let (i, j) = (k % n1, k / n1);
            let x = Self::node_coords(&dom.lo, &h, i, j);
            let f = surf_frames(patch.as_ref(), &x, Deriv::Analytic)?;
            reference.push(patch.map(&x));
            contra.push(f.contra);
            first_fundamental.push(f.first_fundamental());
            let w1 = if i == 0 || i + 1 == n1 { T::half() } else { T::one() };
            let w2 = if j == 0 || j + 1 == n2 { T::half() } else { T::one() };
            weight.push(w1 * w2 * h[0] * h[1] * f.area);
            let s1 = line_stencil(i, n1, h[0])
                .into_iter()
                .map(|(ii, c)| (ii + n1 * j, c))
                .collect();
            let s2 = line_stencil(j, n2, h[1])
                .into_iter()
                .map(|(jj, c)| (i + n1 * jj, c))
                .collect();
            stencil.push([s1, s2]);
        }
        Ok(DiscreteShell {
            patch,
            n1,
            n2,
            h,
            params,
            reference,
            contra,
            first_fundamental,
            weight,
            stencil,
        })
    }

    fn node_coords(lo: &[T; 2], h: &[T; 2], i: usize, j: usize) -> [T; 2] {
        [lo[0] + h[0] * T::lit(i as f64), lo[1] + h[1] * T::lit(j as f64)]
    }

    /// Undeformed state `m = y₀`, `Qₑ = 1₃`, with the whole boundary clamped.
    pub fn reference_state(&self) -> ShellState<T> {
        let n = self.n1 * self.n2;
        let mut s = ShellState {
            n1: self.n1,
            n2: self.n2,
            m: self.reference.clone(),
            q: vec![Quat::identity(); n],
            fixed_m: vec![false; n],
            fixed_q: vec![false; n],
        };
        for k in 0..n {
            let b = s.is_boundary(k);
            s.fixed_m[k] = b;
            s.fixed_q[k] = b;
        }
        s
    }

    fn check_state(&self, s: &ShellState<T>) -> Result<()> {
        let n = self.n1 * self.n2;
        if s.n1 != self.n1
            || s.n2 != self.n2
            || s.m.len() != n
            || s.q.len() != n
            || s.fixed_m.len() != n
            || s.fixed_q.len() != n
        {
            return Err(Error::InvalidParams(format!(
                "state grid {}×{} does not match the discretisation {}×{}",
                s.n1, s.n2, self.n1, self.n2
            )));
        }
        Ok(())
    }

    /// `(Eₑ, Dₑ)` at node `k` from the discrete fields.
    fn node_measures(&self, k: usize, m: &[Vec3<T>], q: &[Mat3<T>]) -> NodeMeasures<T> {
        let qp = q[k];
        let mut grad = Mat3::zero();
        let mut p = [Mat3::zero(); 2];
        let mut g = [Vec3::zero(); 2];
        for a in 0..2 {
            for &(s, c) in &self.stencil[k][a] {
                g[a] += m[s].scale(c);
                p[a] += q[s].scale(c);
            }
            grad += g[a].outer(self.contra[k][a]);
        }
        let e = qp.tmul_mat(&grad) - self.first_fundamental[k];
        let mut d = Mat3::zero();
        for a in 0..2 {
            d -= qp.tmul_mat(&p[a]).cross_vec(self.contra[k][a]);
        }
        NodeMeasures { e, d, grad, p }
    }

    /// Node-wise `(Eₑ, Dₑ)` for inspection.
    pub fn measures(&self, s: &ShellState<T>) -> Result<Vec<(Mat3<T>, Mat3<T>)>> {
        self.check_state(s)?;
        let q: Vec<Mat3<T>> = s.q.iter().map(Quat::to_mat).collect();
        Ok((0..s.m.len())
            .map(|k| {
                let nm = self.node_measures(k, &s.m, &q);
                (nm.e, nm.d)
            })
            .collect())
    }

    /// `Σ_p w_p a_p W(Eₑ, Dₑ)` with trapezoidal weights over the nodes.
    pub fn total_energy(&self, s: &ShellState<T>) -> Result<T> {
        self.check_state(s)?;
        let q: Vec<Mat3<T>> = s.q.iter().map(Quat::to_mat).collect();
        let per_node: Vec<T> = (0..s.m.len())
            .into_par_iter()
            .map(|k| {
                let nm = self.node_measures(k, &s.m, &q);
                self.weight[k] * density(&nm.e, &nm.d, &self.params)
            })
            .collect();
        Ok(per_node.into_iter().fold(T::zero(), |a, b| a + b))
    }

    /// Energy and its gradient: `∂/∂m` per node and the left-trivialised rotation gradient.
    ///
    /// Fixed nodes get zero gradient.
    pub fn energy_and_gradient(&self, s: &ShellState<T>) -> Result<(T, Gradient<T>)> {
        self.check_state(s)?;
        let n = s.m.len();
        let q: Vec<Mat3<T>> = s.q.iter().map(Quat::to_mat).collect();
        struct Local<T> {
            energy: T,
            dq_self: Mat3<T>,
            dm: [Vec3<T>; 2],
            z: [Mat3<T>; 2],
        }
        let locals: Vec<Local<T>> = (0..n)
            .into_par_iter()
            .map(|k| {
                let nm = self.node_measures(k, &s.m, &q);
                let w = self.weight[k];
                let (se, sd) = energy_gradient(&nm.e, &nm.d, &self.params);
                let (se, sd) = (se.scale(w), sd.scale(w));
                let mut dq_self = nm.grad * se.transpose();
                let mut dm = [Vec3::zero(); 2];
                let mut z = [Mat3::zero(); 2];
                for a in 0..2 {
                    dm[a] = q[k] * (se * self.contra[k][a]);
                    z[a] = sd.cross_vec(self.contra[k][a]);
                    dq_self += nm.p[a] * z[a].transpose();
                }
                Local {
                    energy: w * density(&nm.e, &nm.d, &self.params),
                    dq_self,
                    dm,
                    z,
                }
            })
            .collect();

        let mut energy = T::zero();
        let mut gm = vec![Vec3::zero(); n];
        let mut gq = vec![Mat3::zero(); n];
        for (k, l) in locals.iter().enumerate() {
            energy += l.energy;
            gq[k] += l.dq_self;
            for a in 0..2 {
                let qz = q[k] * l.z[a];
                for &(s_idx, c) in &self.stencil[k][a] {
                    gm[s_idx] += l.dm[a].scale(c);
                    gq[s_idx] += qz.scale(c);
                }
            }
        }
        let rot: Vec<Vec3<T>> = (0..n)
            .map(|k| {
                if s.fixed_q[k] {
                    Vec3::zero()
                } else {
                    axl_of_skew_part(&(gq[k] * q[k].transpose())).scale(T::two())
                }
            })
            .collect();
        for (k, g) in gm.iter_mut().enumerate() {
            if s.fixed_m[k] {
                *g = Vec3::zero();
            }
        }
        Ok((energy, Gradient { m: gm, rot }))
    }
}

struct NodeMeasures<T> {
    e: Mat3<T>,
    d: Mat3<T>,
    grad: Mat3<T>,
    p: [Mat3<T>; 2],
}

/// Gradient with respect to positions and left rotation increments `Q ← exp([δ]×)Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient<T> {
    pub m: Vec<Vec3<T>>,
    pub rot: Vec<Vec3<T>>,
}

impl<T: Real> Gradient<T> {
    pub fn norm(&self) -> T {
        self.m
            .iter()
            .chain(self.rot.iter())
            .map(|v| v.norm_squared())
            .sum::<T>()
            .sqrt()
    }

    fn dot(&self, o: &Self) -> T {
        self.m
            .iter()
            .zip(&o.m)
            .chain(self.rot.iter().zip(&o.rot))
            .map(|(a, b)| a.dot(*b))
            .sum()
    }

    fn sub(&self, o: &Self) -> Self {
        Gradient {
            m: self.m.iter().zip(&o.m).map(|(a, b)| *a - *b).collect(),
            rot: self.rot.iter().zip(&o.rot).map(|(a, b)| *a - *b).collect(),
        }
    }
}

/// Moves `s` by `−t g`: positions additively, rotations by `exp(−t δ)` on the left.
pub fn retract<T: Real>(s: &ShellState<T>, g: &Gradient<T>, t: T) -> ShellState<T> {
    let mut out = s.clone();
    for k in 0..s.m.len() {
        if !s.fixed_m[k] {
            out.m[k] = s.m[k] - g.m[k].scale(t);
        }
        if !s.fixed_q[k] {
            out.q[k] = Quat::exp(g.rot[k].scale(-t)).mul(&s.q[k]).normalized();
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizeOptions<T> {
    pub max_iter: usize,
    pub grad_tol: T,
    /// Seed for the initial perturbation of the demonstration problems.
    pub seed: u64,
}

impl<T: Real> Default for MinimizeOptions<T> {
    fn default() -> Self {
        MinimizeOptions {
            max_iter: 5000,
            grad_tol: T::lit(1e-8),
            seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterRecord<T> {
    pub iteration: usize,
    pub energy: T,
    pub grad_norm: T,
    /// Accepted step; zero for the starting record.
    pub step: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeReport<T> {
    pub trace: Vec<IterRecord<T>>,
    pub final_state: ShellState<T>,
    pub converged: bool,
}

impl<T: Real> MinimizeReport<T> {
    pub fn initial_energy(&self) -> T {
        self.trace.first().map_or(T::zero(), |r| r.energy)
    }

    pub fn final_energy(&self) -> T {
        self.trace.last().map_or(T::zero(), |r| r.energy)
    }

    pub fn final_grad_norm(&self) -> T {
        self.trace.last().map_or(T::zero(), |r| r.grad_norm)
    }

    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }

    pub fn is_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].energy <= w[0].energy)
    }
}

/// The line search found no acceptable step; carries the iterations completed so far.
#[derive(Clone, Debug, PartialEq)]
pub struct Stalled<T> {
    pub iteration: usize,
    pub partial: MinimizeReport<T>,
}

impl<T> From<Stalled<T>> for Error {
    fn from(s: Stalled<T>) -> Self {
        Error::LineSearchStalled { iteration: s.iteration }
    }
}

const ARMIJO_C1: f64 = 1e-4;
const MIN_STEP: f64 = 1e-16;

/// Projected gradient descent with Armijo backtracking from a Barzilai-Borwein trial step.
pub fn minimize<T: Real>(
    shell: &DiscreteShell<T>,
    state0: &ShellState<T>,
    options: &MinimizeOptions<T>,
) -> Result<std::result::Result<MinimizeReport<T>, Stalled<T>>> {
    let mut state = state0.clone();
    let (mut energy, mut grad) = shell.energy_and_gradient(&state)?;
    let mut gnorm = grad.norm();
    let mut trace = vec![IterRecord {
        iteration: 0,
        energy,
        grad_norm: gnorm,
        step: T::zero(),
    }];
    let mut prev: Option<(Gradient<T>, T)> = None;

    for iteration in 1..=options.max_iter {
        if gnorm < options.grad_tol {
            break;
        }
        let g2 = gnorm * gnorm;
        let mut t = match &prev {
            Some((g_old, t_old)) => {
                // s = −t_old g_old, y = g − g_old
                let y = grad.sub(g_old);
                let sy = -*t_old * g_old.dot(&y);
                let ss = *t_old * *t_old * g_old.dot(g_old);
                let bb = ss / sy;
                if bb.is_finite() && bb > T::zero() {
                    bb
                } else {
                    T::one()
                }
            }
            None => T::one(),
        };
        let accepted = loop {
            if t < T::lit(MIN_STEP) {
                break None;
            }
            let trial = retract(&state, &grad, t);
            let e_trial = shell.total_energy(&trial)?;
            if e_trial.is_finite() && e_trial <= energy - T::lit(ARMIJO_C1) * t * g2 {
                break Some((trial, e_trial));
            }
            t *= T::half();
        };
        let Some((next, e_next)) = accepted else {
            return Ok(Err(Stalled {
                iteration,
                partial: MinimizeReport {
                    trace,
                    final_state: state,
                    converged: false,
                },
            }));
        };
        let (e_chk, g_next) = shell.energy_and_gradient(&next)?;
        debug_assert!((e_chk - e_next).abs() <= T::lit(1e-12) * (T::one() + e_next.abs()));
        prev = Some((grad, t));
        state = next;
        energy = e_next;
        grad = g_next;
        gnorm = grad.norm();
        trace.push(IterRecord {
            iteration,
            energy,
            grad_norm: gnorm,
            step: t,
        });
    }
    let converged = gnorm < options.grad_tol;
    Ok(Ok(MinimizeReport {
        trace,
        final_state: state,
        converged,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Plane;
    use crate::tensor::skew_from_axial;

    #[test]
    fn worked_energy_values() {
        let p = EnergyParams::<f64>::unit();
        assert_eq!(energy_3d(&Mat3::zero(), &Mat3::zero(), &p).unwrap(), 0.0);
        assert_eq!(energy_3d(&Mat3::identity(), &Mat3::zero(), &p).unwrap(), 4.5);
        let w = skew_from_axial(Vec3::unit(2));
        assert_eq!(energy_3d(&w, &Mat3::zero(), &p).unwrap(), 2.0);
        let d = -Vec3::unit(0).outer(Vec3::unit(2));
        assert!((energy_shell(&Mat3::zero(), &d, &p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = EnergyParams::<f64>::unit();
        p.p = 3.0;
        assert!(energy_3d(&Mat3::zero(), &Mat3::zero(), &p).is_ok());
        assert!(matches!(
            energy_shell(&Mat3::zero(), &Mat3::zero(), &p),
            Err(Error::InvalidParams(_))
        ));
        assert!(EnergyParams::new(0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0).is_err());
        assert!(EnergyParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn density_gradient_matches_differences() {
        let mut p = EnergyParams::<f64>::unit();
        p.mu_c = 0.7;
        p.kappa = 1.3;
        p.a2 = 0.4;
        for pp in [2.0, 3.0] {
            p.p = pp;
            let e = Mat3([[0.1, 0.2, -0.3], [0.05, -0.2, 0.1], [0.3, 0.0, 0.15]]);
            let d = Mat3([[0.2, -0.1, 0.0], [0.3, 0.1, -0.2], [0.05, 0.25, -0.1]]);
            let (ge, gd) = energy_gradient(&e, &d, &p);
            let h = 1e-6;
            for i in 0..3 {
                for j in 0..3 {
                    let mut dp = Mat3::zero();
                    dp[(i, j)] = h;
                    let fe = (density(&(e + dp), &d, &p) - density(&(e - dp), &d, &p)) / (2.0 * h);
                    let fd = (density(&e, &(d + dp), &p) - density(&e, &(d - dp), &p)) / (2.0 * h);
                    assert!((fe - ge[(i, j)]).abs() < 1e-8);
                    assert!((fd - gd[(i, j)]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn reference_state_has_zero_energy() {
        let shell = DiscreteShell::new(Arc::new(Plane::<f64>::default()), 5, 5, EnergyParams::unit()).unwrap();
        let s = shell.reference_state();
        assert_eq!(shell.total_energy(&s).unwrap(), 0.0);
        let r = minimize(&shell, &s, &MinimizeOptions::default()).unwrap().unwrap();
        assert_eq!(r.iterations(), 0);
        assert!(r.converged);
    }

    #[test]
    fn stencils_are_exact_on_quadratics() {
        for n in [3, 4, 7] {
            for i in 0..n {
                let s = line_stencil(i, n, 0.5);
                let x = |k: usize| 0.5 * k as f64;
                let d: f64 = s.iter().map(|(k, c)| c * (x(*k) * x(*k) + 3.0 * x(*k))).sum();
                assert!((d - (2.0 * x(i) + 3.0)).abs() < 1e-13);
            }
        }
    }

    fn perturbed_plate(n: usize, seed: u64) -> (DiscreteShell<f64>, ShellState<f64>) {
        let shell = DiscreteShell::new(Arc::new(Plane::<f64>::default()), n, n, EnergyParams::unit()).unwrap();
        let mut s = shell.reference_state();
        s.perturb_rotations(0.05, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        for k in 0..s.m.len() {
            if !s.fixed_m[k] {
                s.m[k] += Vec3::new(
                    rng.gen_range(-0.01..0.01),
                    rng.gen_range(-0.01..0.01),
                    rng.gen_range(-0.01..0.01),
                );
            }
        }
        (shell, s)
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (shell, mut s) = perturbed_plate(4, 3);
        s.fixed_m[0] = false;
        s.fixed_q[1] = false;
        let (_, g) = shell.energy_and_gradient(&s).unwrap();
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for k in 0..s.m.len() {
            for c in 0..3 {
                if !s.fixed_m[k] {
                    let (mut a, mut b) = (s.clone(), s.clone());
                    a.m[k][c] += h;
                    b.m[k][c] -= h;
                    let fd = (shell.total_energy(&a).unwrap() - shell.total_energy(&b).unwrap()) / (2.0 * h);
                    worst = worst.max((fd - g.m[k][c]).abs() / (1e-8 + g.m[k][c].abs()));
                }
                if !s.fixed_q[k] {
                    let e = Vec3::unit(c).scale(h);
                    let (mut a, mut b) = (s.clone(), s.clone());
                    a.q[k] = Quat::exp(e).mul(&s.q[k]);
                    b.q[k] = Quat::exp(-e).mul(&s.q[k]);
                    let fd = (shell.total_energy(&a).unwrap() - shell.total_energy(&b).unwrap()) / (2.0 * h);
                    worst = worst.max((fd - g.rot[k][c]).abs() / (1e-8 + g.rot[k][c].abs()));
                }
            }
        }
        assert!(worst < 1e-5, "worst relative gradient error {worst}");
    }

    #[test]
    fn descent_on_clamped_plate() {
        let (shell, s) = perturbed_plate(8, 7);
        let r = minimize(&shell, &s, &MinimizeOptions::default()).unwrap().unwrap();
        assert!(r.is_monotone());
        assert!(r.converged);
        assert!(r.final_energy() < 1e-3 * r.initial_energy());
    }
}
