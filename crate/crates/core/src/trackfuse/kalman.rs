// SPDX-License-Identifier: Apache-2.0

//! Constant-velocity Kalman filter over `(cx, cy, w, h)` and their per-frame
//! velocities. Observations are the four box parameters.

use crate::boxes::BoundingBox;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const STATE_DIM: usize = 8;
pub const OBS_DIM: usize = 4;

pub type StateVector<T> = [T; STATE_DIM];
pub type Covariance<T> = [[T; STATE_DIM]; STATE_DIM];

#[derive(Debug, Clone, PartialEq)]
pub struct FuseConfig<T> {
    /// Weight of the detection when blending it with the track prediction.
    pub det_weight: T,
    pub match_iou: T,
    pub max_misses: u32,
    pub position_std: T,
    pub size_std: T,
    pub velocity_std: T,
    pub measurement_std: T,
    /// Velocity uncertainty of a freshly spawned track.
    pub initial_velocity_std: T,
    /// Score multiplier applied per missed frame to coasting tracks.
    pub miss_decay: T,
}

impl<T: Scalar> Default for FuseConfig<T> {
    fn default() -> Self {
        Self {
            det_weight: T::lit(0.7),
            match_iou: T::lit(0.3),
            max_misses: 5,
            position_std: T::one(),
            size_std: T::lit(0.5),
            velocity_std: T::lit(0.1),
            measurement_std: T::one(),
            initial_velocity_std: T::lit(10.0),
            miss_decay: T::lit(0.9),
        }
    }
}

impl<T: Scalar> FuseConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if !unit(self.det_weight) {
            return Err(Error::Config(format!(
                "fusion weight {} outside [0, 1]",
                self.det_weight
            )));
        }
        if !unit(self.match_iou) {
            return Err(Error::Config(format!(
                "match IoU {} outside [0, 1]",
                self.match_iou
            )));
        }
        if !unit(self.miss_decay) {
            return Err(Error::Config(format!(
                "miss decay {} outside [0, 1]",
                self.miss_decay
            )));
        }
        for (name, v) in [
            ("position", self.position_std),
            ("size", self.size_std),
            ("velocity", self.velocity_std),
            ("initial velocity", self.initial_velocity_std),
        ] {
            if !(v >= T::zero() && v.is_finite()) {
                return Err(Error::Config(format!("{name} noise {v} must be finite and >= 0")));
            }
        }
        if !(self.measurement_std > T::zero()) {
            return Err(Error::Config("measurement noise must be positive".into()));
        }
        Ok(())
    }

    /// Diagonal process noise `Q`.
    pub fn process_covariance(&self) -> Covariance<T> {
        let (p, s, v) = (self.position_std, self.size_std, self.velocity_std);
        diagonal([p * p, p * p, s * s, s * s, v * v, v * v, v * v, v * v])
    }

    pub fn measurement_variance(&self) -> T {
        self.measurement_std * self.measurement_std
    }
}

pub(crate) fn diagonal<T: Scalar>(d: [T; STATE_DIM]) -> Covariance<T> {
    let mut m = [[T::zero(); STATE_DIM]; STATE_DIM];
    for i in 0..STATE_DIM {
        m[i][i] = d[i];
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackState<T> {
    /// `(cx, cy, w, h, vcx, vcy, vw, vh)`
    pub mean: StateVector<T>,
    pub covariance: Covariance<T>,
    pub class_id: usize,
    pub age: u32,
    pub misses: u32,
    pub track_id: u64,
    /// Score of the last detection absorbed by the track.
    pub score: T,
}

impl<T: Scalar> TrackState<T> {
    /// A new track at `bbox` with zero velocity.
    pub fn spawn(
        bbox: &BoundingBox<T>,
        class_id: usize,
        score: T,
        track_id: u64,
        cfg: &FuseConfig<T>,
    ) -> Self {
        let [cx, cy, w, h] = bbox.to_cxcywh();
        let r = cfg.measurement_variance();
        let v = cfg.initial_velocity_std * cfg.initial_velocity_std;
        let z = T::zero();
        Self {
            mean: [cx, cy, w, h, z, z, z, z],
            covariance: diagonal([r, r, r, r, v, v, v, v]),
            class_id,
            age: 0,
            misses: 0,
            track_id,
            score,
        }
    }

    /// Box at the current mean; `None` once it has left the image quadrant
    /// or collapsed.
    pub fn bbox(&self) -> Option<BoundingBox<T>> {
        let [cx, cy, w, h, ..] = self.mean;
        if !(w > T::zero() && h > T::zero()) {
            return None;
        }
        BoundingBox::from_center_clipped(cx, cy, w, h)
    }

    /// Checks the covariance is symmetric and positive semi-definite.
    pub fn check_covariance(&self) -> Result<()> {
        let p = &self.covariance;
        let scale = p
            .iter()
            .flatten()
            .fold(T::zero(), |m, v| m.max(v.abs()))
            .max(T::one());
        let tol = T::lit(1e-9) * scale;
        for i in 0..STATE_DIM {
            for j in 0..i {
                if (p[i][j] - p[j][i]).abs() > tol {
                    return Err(Error::Numerical(format!("covariance asymmetric at ({i}, {j})")));
                }
            }
        }
        let mut jittered = *p;
        for (i, row) in jittered.iter_mut().enumerate() {
            row[i] = row[i] + tol;
        }
        cholesky(&jittered)
            .map(|_| ())
            .ok_or_else(|| Error::Numerical("covariance is not positive semi-definite".into()))
    }
}

/// Advances the mean by one frame of velocity and inflates the covariance.
pub fn kalman_predict<T: Scalar>(state: &TrackState<T>, cfg: &FuseConfig<T>) -> TrackState<T> {
    let mut next = state.clone();
    for i in 0..OBS_DIM {
        next.mean[i] = state.mean[i] + state.mean[i + OBS_DIM];
    }
    // With P = [[A, B], [B^T, D]] and F = [[I, I], [0, I]]:
    // F P F^T = [[A + B + B^T + D, B + D], [B^T + D, D]].
    let p = &state.covariance;
    let q = cfg.process_covariance();
    let n = OBS_DIM;
    for i in 0..n {
        for j in 0..n {
            let a = p[i][j];
            let b = p[i][j + n];
            let bt = p[i + n][j];
            let d = p[i + n][j + n];
            next.covariance[i][j] = a + b + bt + d + q[i][j];
            next.covariance[i][j + n] = b + d + q[i][j + n];
            next.covariance[i + n][j] = bt + d + q[i + n][j];
            next.covariance[i + n][j + n] = d + q[i + n][j + n];
        }
    }
    next.age = state.age + 1;
    next
}

/// Folds a box observation into the state.
pub fn kalman_update<T: Scalar>(
    state: &TrackState<T>,
    measurement: &BoundingBox<T>,
    cfg: &FuseConfig<T>,
) -> Result<TrackState<T>> {
    let p = &state.covariance;
    let r = cfg.measurement_variance();
    let z = measurement.to_cxcywh();

    // S = H P H^T + R is the top-left block of P plus R.
    let mut s = [[T::zero(); OBS_DIM]; OBS_DIM];
    for i in 0..OBS_DIM {
        for j in 0..OBS_DIM {
            s[i][j] = p[i][j];
        }
        s[i][i] = s[i][i] + r;
    }
    let chol = cholesky(&s)
        .ok_or_else(|| Error::Numerical("innovation covariance is not positive definite".into()))?;

    // K = P H^T S^-1; row k of K solves S x = (P H^T)[k] since S is symmetric.
    let mut gain = [[T::zero(); OBS_DIM]; STATE_DIM];
    for (k, row) in gain.iter_mut().enumerate() {
        let rhs: [T; OBS_DIM] = std::array::from_fn(|j| p[k][j]);
        *row = cholesky_solve(&chol, &rhs);
    }

    let innovation: [T; OBS_DIM] = std::array::from_fn(|i| z[i] - state.mean[i]);
    let mut next = state.clone();
    for k in 0..STATE_DIM {
        let correction = (0..OBS_DIM).fold(T::zero(), |acc, j| acc + gain[k][j] * innovation[j]);
        next.mean[k] = state.mean[k] + correction;
    }

    // P' = P - K S K^T = P - K (H P).
    for i in 0..STATE_DIM {
        for j in 0..STATE_DIM {
            let reduce = (0..OBS_DIM).fold(T::zero(), |acc, m| acc + gain[i][m] * p[m][j]);
            next.covariance[i][j] = p[i][j] - reduce;
        }
    }
    let two = T::lit(2.0);
    for i in 0..STATE_DIM {
        for j in 0..i {
            let avg = (next.covariance[i][j] + next.covariance[j][i]) / two;
            next.covariance[i][j] = avg;
            next.covariance[j][i] = avg;
        }
    }
    next.misses = 0;
    Ok(next)
}

/// Lower-triangular Cholesky factor, `None` unless positive definite.
pub(crate) fn cholesky<T: Scalar, const N: usize>(m: &[[T; N]; N]) -> Option<[[T; N]; N]> {
    let mut l = [[T::zero(); N]; N];
    for i in 0..N {
        for j in 0..=i {
            let mut sum = m[i][j];
            for k in 0..j {
                sum = sum - l[i][k] * l[j][k];
            }
            if i == j {
                if !(sum > T::zero()) {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve<T: Scalar, const N: usize>(l: &[[T; N]; N], b: &[T; N]) -> [T; N] {
    let mut y = [T::zero(); N];
    for i in 0..N {
        let mut sum = b[i];
        for k in 0..i {
            sum = sum - l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = [T::zero(); N];
    for i in (0..N).rev() {
        let mut sum = y[i];
        for k in i + 1..N {
            sum = sum - l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    x
}
