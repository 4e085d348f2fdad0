//! Fully connected binary classifiers with optional batch normalization
//! and an input skip connection, trained by backpropagation and Adam.

mod model_file;
mod net;
mod params;
mod spec;
mod train;

use std::fmt::Debug;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive};

pub use model_file::{Model, FORMAT_VERSION};
pub use net::{batch_loss, gradient, BatchStats, Gradients, LayerGradient, Mode, BN_EPS};
pub use params::{init_params, BatchNorm, Dense, HiddenLayer, NetworkParams};
pub use spec::{preset_spec, Activation, LayerSpec, NetworkSpec, PRESET_NAMES};
pub use train::{accuracy, train, train_with_progress, Adam, LossCurve, TrainConfig, TrainData, BN_MOMENTUM};

/// Scalar type of network tensors (`f32` for training and inference,
/// `f64` for derivative checks).
pub trait Real:
    Float
    + FromPrimitive
    + LinalgScalar
    + ScalarOperand
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Send
    + Sync
    + 'static
{
    /// `tanh` as used by the tanh activation.
    fn tanh_activation(self) -> Self;
}

impl Real for f32 {
    /// Odd rational minimax approximation on `[−7.9053, 7.9053]`, saturated
    /// outside; within a few ulp of `tanh` and free of library calls, so it
    /// vectorizes.
    #[inline]
    fn tanh_activation(self) -> f32 {
        const CLAMP: f32 = 7.905_311;
        const ALPHA: [f32; 7] = [
            4.893_524_6e-3,
            6.372_619_3e-4,
            1.485_722_4e-5,
            5.122_297e-8,
            -8.604_671_5e-11,
            2.000_187_9e-13,
            -2.760_768_5e-16,
        ];
        const BETA: [f32; 4] = [4.893_525_2e-3, 2.268_434_6e-3, 1.185_347_1e-4, 1.198_258_4e-6];
        let x = self.clamp(-CLAMP, CLAMP);
        let x2 = x * x;
        let mut p = ALPHA[6];
        for &a in ALPHA[..6].iter().rev() {
            p = p * x2 + a;
        }
        let mut q = BETA[3];
        for &b in BETA[..3].iter().rev() {
            q = q * x2 + b;
        }
        // Near zero the identity is more accurate than the ratio.
        if self.abs() < 4e-4 {
            self
        } else {
            x * p / q
        }
    }
}

impl Real for f64 {
    fn tanh_activation(self) -> f64 {
        self.tanh()
    }
}

#[cfg(test)]
mod tests {
    use super::Real;

    #[test]
    fn f32_tanh_tracks_the_library() {
        let mut worst = 0.0f64;
        for i in -200_000..=200_000 {
            let x = i as f32 * 1e-4;
            let err = (x.tanh_activation() as f64 - (x as f64).tanh()).abs();
            worst = worst.max(err);
        }
        assert!(worst < 1e-6, "max abs error {worst}");
        assert!((1e3f32.tanh_activation() - 1.0).abs() < 1e-6);
        assert!((-1e3f32).tanh_activation() < 0.0);
        assert_eq!(0.0f32.tanh_activation(), 0.0);
        assert!(f32::NAN.tanh_activation().is_nan());
    }
}
