//! Exact arithmetic in the two-dimensional search subspace.
//!
//! A search instance with marked fraction `lambda` never leaves the plane
//! spanned by `|R>` (equal superposition of unmarked basis states) and `|T>`
//! (equal superposition of marked ones). In that basis `|R> = (1, 0)` and
//! `|T> = (0, 1)`, the oracle is `S_o(alpha) = diag(1, e^{i alpha})`, and the
//! generalized reflection about the uniform start state is
//!
//! ```text
//! S_r(beta) = e^{i beta} (I - (1 - e^{-i beta}) |psi0><psi0|),
//! ```
//!
//! which acts as the identity on `|psi0>` and multiplies its orthogonal
//! complement by `e^{i beta}`. One search iterate is
//! `G(alpha, beta) = -S_r(beta) S_o(alpha)`; the leading minus sign is kept
//! so matrices stay bit-comparable across modules even though it is only a
//! global phase.
//!
//! The product of two consecutive iterates is a single SU(2) rotation, so a
//! `k`-iterate evolution reduces to one axis-angle decomposition and a
//! closed-form power. States also map onto a Bloch sphere with `|R>` at the
//! north pole and `|T>` at the south pole, which is what the trajectory
//! export produces.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Mul;

use crate::error::{Error, Result};

/// Below this value of |sin(phi)| a rotation axis is considered undefined.
const DEGENERATE_SIN_PHI: f64 = 1e-12;

fn check_lambda_open_unit(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLambda {
            value: lambda,
            requirement: "(0, 1)",
        })
    }
}

/// Amplitudes of a state in the `{|R>, |T>}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceState {
    /// Amplitude of `|R>`, the unmarked superposition.
    pub a_r: Complex64,
    /// Amplitude of `|T>`, the marked superposition.
    pub a_t: Complex64,
}

impl SubspaceState {
    pub fn new(a_r: Complex64, a_t: Complex64) -> Self {
        Self { a_r, a_t }
    }

    /// `|a_R|^2 + |a_T|^2`; 1 for any physical state.
    pub fn norm_sqr(&self) -> f64 {
        self.a_r.norm_sqr() + self.a_t.norm_sqr()
    }

    /// Probability of measuring a marked state.
    pub fn success_probability(&self) -> f64 {
        self.a_t.norm_sqr()
    }

    /// Fixes the global phase: the largest-magnitude amplitude is made real
    /// and non-negative, with ties broken toward `a_R`. Well defined at both
    /// poles, where one amplitude vanishes.
    pub fn canonicalized(&self) -> Self {
        let lead = if self.a_t.norm_sqr() > self.a_r.norm_sqr() {
            self.a_t
        } else {
            self.a_r
        };
        let mag = lead.norm();
        if mag == 0.0 {
            return *self;
        }
        let phase_conj = lead.conj() / mag;
        Self {
            a_r: self.a_r * phase_conj,
            a_t: self.a_t * phase_conj,
        }
    }
}

/// `|psi0> = sqrt(1-lambda) |R> + sqrt(lambda) |T>`, the uniform start state.
pub fn initial_state(lambda: f64) -> Result<SubspaceState> {
    check_lambda_open_unit(lambda)?;
    Ok(SubspaceState::new(
        Complex64::new((1.0 - lambda).sqrt(), 0.0),
        Complex64::new(lambda.sqrt(), 0.0),
    ))
}

/// A 2x2 complex matrix, row-major. Constructors in this module produce
/// unitaries; the type itself does not enforce unitarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(pub [[Complex64; 2]; 2]);

impl Unitary2 {
    pub const fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self([[one, zero], [zero, one]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Multiplies every entry by a scalar.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let m = &self.0;
        Self([
            [m[0][0] * factor, m[0][1] * factor],
            [m[1][0] * factor, m[1][1] * factor],
        ])
    }

    /// Matrix-vector product. Preserves the norm when `self` is unitary.
    pub fn apply(&self, state: &SubspaceState) -> SubspaceState {
        let m = &self.0;
        SubspaceState::new(
            m[0][0] * state.a_r + m[0][1] * state.a_t,
            m[1][0] * state.a_r + m[1][1] * state.a_t,
        )
    }

    /// Largest entry of |U^dagger U - I|; ~1e-16 for the unitaries built here.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint() * *self;
        let id = Self::identity();
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((p.0[r][c] - id.0[r][c]).norm());
            }
        }
        worst
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Splits a unitary as `U = e^{i delta} (cos(phi) I + i sin(phi) n.sigma)`
    /// and returns `(delta, rotation)`. The rotation angle is placed in
    /// `[0, pi]`; the axis sign absorbs the remaining freedom. The branch of
    /// `delta` is fixed by `arg(det U)/2` in `(-pi/2, pi/2]`; powers of the
    /// reassembled pair reproduce `U^m` exactly regardless of that choice.
    pub fn phase_rotation(&self) -> (f64, RotationDecomposition) {
        let delta = 0.5 * self.det().arg();
        let v = self.scaled(Complex64::from_polar(1.0, -delta));
        let m = &v.0;
        let cos_phi = 0.5 * (m[0][0].re + m[1][1].re);
        let wx = 0.5 * (m[0][1].im + m[1][0].im);
        let wy = 0.5 * (m[0][1].re - m[1][0].re);
        let wz = 0.5 * (m[0][0].im - m[1][1].im);
        let sin_phi = (wx * wx + wy * wy + wz * wz).sqrt();
        if sin_phi < DEGENERATE_SIN_PHI {
            return (delta, RotationDecomposition::degenerate(cos_phi));
        }
        let phi = sin_phi.atan2(cos_phi);
        (
            delta,
            RotationDecomposition {
                phi,
                n_x: wx / sin_phi,
                n_y: wy / sin_phi,
                n_z: wz / sin_phi,
                degenerate: false,
            },
        )
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Unitary2(out)
    }
}

/// Oracle `S_o(alpha) = diag(1, e^{i alpha})`: multiplies the marked
/// superposition by a fixed phase and leaves `|R>` untouched.
pub fn oracle_matrix(alpha: f64) -> Unitary2 {
    let zero = Complex64::new(0.0, 0.0);
    Unitary2([
        [Complex64::new(1.0, 0.0), zero],
        [zero, Complex64::from_polar(1.0, alpha)],
    ])
}

/// Generalized reflection `S_r(beta)` about `|psi0>`: identity on `|psi0>`,
/// phase `e^{i beta}` on its orthogonal complement. The `e^{i beta}` prefactor
/// is folded into the entries.
pub fn reflection_matrix(beta: f64, lambda: f64) -> Result<Unitary2> {
    check_lambda_open_unit(lambda)?;
    let f = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, beta);
    let cross = (lambda * (1.0 - lambda)).sqrt();
    Ok(Unitary2([
        [Complex64::new(1.0, 0.0) - f * lambda, f * cross],
        [f * cross, Complex64::new(1.0, 0.0) - f * (1.0 - lambda)],
    ]))
}

/// One search iterate `G(alpha, beta) = -S_r(beta) S_o(alpha)`.
pub fn grover_iterate(alpha: f64, beta: f64, lambda: f64) -> Result<Unitary2> {
    let product = reflection_matrix(beta, lambda)? * oracle_matrix(alpha);
    Ok(product.scaled(Complex64::new(-1.0, 0.0)))
}

/// Axis-angle form of an SU(2) matrix:
/// `M = cos(phi) I + i sin(phi) (n_x sigma_x + n_y sigma_y + n_z sigma_z)`.
///
/// `phi` lies in `[0, pi]`. When `sin(phi)` vanishes the matrix is `+I` or
/// `-I`, the axis is undefined, and `degenerate` is set with `phi` snapped to
/// exactly `0` or `pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationDecomposition {
    pub phi: f64,
    pub n_x: f64,
    pub n_y: f64,
    pub n_z: f64,
    pub degenerate: bool,
}

impl RotationDecomposition {
    fn degenerate(cos_phi: f64) -> Self {
        Self {
            phi: if cos_phi >= 0.0 { 0.0 } else { PI },
            n_x: 0.0,
            n_y: 0.0,
            n_z: 0.0,
            degenerate: true,
        }
    }

    /// Reassembles the matrix; equal to `power(1)`.
    pub fn matrix(&self) -> Unitary2 {
        self.power(1)
    }

    /// `M^m = cos(m phi) I + i sin(m phi) n.sigma`, evaluated in closed form.
    /// For a degenerate decomposition this is `(+/-1)^m I` exactly.
    pub fn power(&self, m: u32) -> Unitary2 {
        if self.degenerate {
            let sign = if self.phi == 0.0 || m % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            return Unitary2::identity().scaled(Complex64::new(sign, 0.0));
        }
        let angle = self.phi * f64::from(m);
        let (c, s) = (angle.cos(), angle.sin());
        // cos I + i s (nx sx + ny sy + nz sz)
        Unitary2([
            [
                Complex64::new(c, s * self.n_z),
                Complex64::new(s * self.n_y, s * self.n_x),
            ],
            [
                Complex64::new(-s * self.n_y, s * self.n_x),
                Complex64::new(c, -s * self.n_z),
            ],
        ])
    }
}

/// Closed-form axis-angle decomposition of the two-iterate block for the
/// fixed pi oracle: with `G_d(theta) = G(pi, theta)`,
///
/// ```text
/// M = e^{-i (theta1 + theta2)/2} G_d(theta2) G_d(theta1)
///   = cos(phi) I + i sin(phi) n.sigma,
/// cos(phi) = cos((theta1+theta2)/2) + 8 lambda (1-lambda) sin(theta1/2) sin(theta2/2).
/// ```
///
/// Raising `M` to the `m`-th power then costs one trig evaluation instead of
/// `m` matrix products.
pub fn pair_iterate_decomposition(
    theta1: f64,
    theta2: f64,
    lambda: f64,
) -> Result<RotationDecomposition> {
    check_lambda_open_unit(lambda)?;
    let s1 = (0.5 * theta1).sin();
    let s2 = (0.5 * theta2).sin();
    let cos_phi = ((0.5 * (theta1 + theta2)).cos() + 8.0 * lambda * (1.0 - lambda) * s1 * s2)
        .clamp(-1.0, 1.0);
    let phi = cos_phi.acos();
    let sin_phi = phi.sin();
    if sin_phi < DEGENERATE_SIN_PHI {
        return Ok(RotationDecomposition::degenerate(cos_phi));
    }
    let cross = (lambda * (1.0 - lambda)).sqrt();
    Ok(RotationDecomposition {
        phi,
        n_x: 2.0 * cross * (0.5 * (theta1 - theta2)).sin() / sin_phi,
        n_y: 4.0 * (1.0 - 2.0 * lambda) * cross * s1 * s2 / sin_phi,
        n_z: -(1.0 - 2.0 * lambda) * (0.5 * (theta1 + theta2)).sin() / sin_phi,
        degenerate: false,
    })
}

/// State after `k` iterates on `|psi0>`: application `i` (1-indexed) uses
/// `theta1` when `i` is odd and `theta2` when it is even, with the oracle
/// phase `alpha` in every iterate. For `k >= 2` the two-iterate block is
/// raised to its closed-form power; an odd `k` appends one more `theta1`
/// iterate. All phases of the literal operator product are retained.
pub fn final_state(
    lambda: f64,
    alpha: f64,
    theta1: f64,
    theta2: f64,
    k: u32,
) -> Result<SubspaceState> {
    if k == 0 {
        return Err(Error::InvalidQueryCount);
    }
    let start = initial_state(lambda)?;
    let g1 = grover_iterate(alpha, theta1, lambda)?;
    if k == 1 {
        return Ok(g1.apply(&start));
    }
    let g2 = grover_iterate(alpha, theta2, lambda)?;
    let (delta, rotation) = (g2 * g1).phase_rotation();
    let half = k / 2;
    let block = rotation
        .power(half)
        .scaled(Complex64::from_polar(1.0, delta * f64::from(half)));
    let mut state = block.apply(&start);
    if k % 2 == 1 {
        state = g1.apply(&state);
    }
    Ok(state)
}

/// A point on the unit Bloch sphere. `(0, 0, 1)` is `|R>` (north pole) and
/// `(0, 0, -1)` is `|T>` (south pole).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Bloch coordinates of a normalized state, after applying the global-phase
/// convention of [`SubspaceState::canonicalized`].
pub fn bloch_coords(state: &SubspaceState) -> BlochVector {
    let s = state.canonicalized();
    let cross = s.a_r.conj() * s.a_t;
    BlochVector {
        x: 2.0 * cross.re,
        y: 2.0 * cross.im,
        z: s.a_r.norm_sqr() - s.a_t.norm_sqr(),
    }
}

/// Bloch trajectory of a `k`-iterate run: `k + 1` points, the start state
/// followed by the state after each iterate in application order.
pub fn trajectory(
    lambda: f64,
    alpha: f64,
    theta1: f64,
    theta2: f64,
    k: u32,
) -> Result<Vec<BlochVector>> {
    if k == 0 {
        return Err(Error::InvalidQueryCount);
    }
    let iterates = [
        grover_iterate(alpha, theta1, lambda)?,
        grover_iterate(alpha, theta2, lambda)?,
    ];
    let mut state = initial_state(lambda)?;
    let mut points = Vec::with_capacity(k as usize + 1);
    points.push(bloch_coords(&state));
    for i in 1..=k {
        state = iterates[(i as usize + 1) % 2].apply(&state);
        points.push(bloch_coords(&state));
    }
    Ok(points)
}
