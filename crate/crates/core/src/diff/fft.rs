//! Iterative radix-2 Cooley-Tukey FFT.
//!
//! Forward transform is `X[k] = sum_n x[n] exp(-2 pi i k n / N)` and the
//! inverse carries the `1/N` factor, so `ifft(fft(x)) == x`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Complex vector stored as parallel real and imaginary arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexVector {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::shape(
                "ComplexVector::new",
                format!("re has {} entries, im has {}", re.len(), im.len()),
            ));
        }
        Ok(Self { re, im })
    }

    pub fn from_real(re: Vec<f64>) -> Self {
        let im = vec![0.0; re.len()];
        Self { re, im }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re.iter().zip(&self.im).map(|(a, b)| a * a + b * b).sum()
    }
}

pub fn fft(x: &ComplexVector) -> Result<ComplexVector> {
    let plan = FftPlan::new(x.len())?;
    let mut out = x.clone();
    plan.forward(&mut out.re, &mut out.im);
    Ok(out)
}

pub fn ifft(x: &ComplexVector) -> Result<ComplexVector> {
    let plan = FftPlan::new(x.len())?;
    let mut out = x.clone();
    plan.inverse(&mut out.re, &mut out.im);
    Ok(out)
}

/// Precomputed twiddles and bit-reversal permutation for one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    rev: Vec<usize>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::invalid(format!(
                "FFT length must be a power of two, got {n}"
            )));
        }
        let half = n / 2;
        let (cos, sin) = (0..half)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / n as f64;
                (theta.cos(), theta.sin())
            })
            .unzip();
        let bits = n.trailing_zeros();
        let rev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Ok(Self { n, cos, sin, rev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, re: &mut [f64], im: &mut [f64]) {
        self.transform(re, im, false);
    }

    /// Inverse transform including the `1/N` normalisation.
    pub fn inverse(&self, re: &mut [f64], im: &mut [f64]) {
        self.transform(re, im, true);
        let scale = 1.0 / self.n as f64;
        for v in re.iter_mut().chain(im.iter_mut()) {
            *v *= scale;
        }
    }

    fn transform(&self, re: &mut [f64], im: &mut [f64], inverse: bool) {
        let n = self.n;
        assert!(re.len() == n && im.len() == n, "buffer length does not match plan");
        for i in 0..n {
            let j = self.rev[i];
            if j > i {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let sign = if inverse { -1.0 } else { 1.0 };
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let wr = self.cos[k * stride];
                    let wi = sign * self.sin[k * stride];
                    let a = start + k;
                    let b = a + half;
                    let tr = re[b] * wr - im[b] * wi;
                    let ti = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - tr;
                    im[b] = im[a] - ti;
                    re[a] += tr;
                    im[a] += ti;
                }
            }
            len *= 2;
        }
    }

    /// First `modes` DFT coefficients of two real signals, sharing one complex transform.
    ///
    /// Returns `(re_a, im_a, re_b, im_b)`, each of length `modes`.
    pub(crate) fn half_spectrum_pair(
        &self,
        a: &[f64],
        b: &[f64],
        modes: usize,
        scratch: &mut (Vec<f64>, Vec<f64>),
    ) -> [Vec<f64>; 4] {
        let n = self.n;
        let (zr, zi) = scratch;
        zr.clear();
        zr.extend_from_slice(a);
        zi.clear();
        zi.extend_from_slice(b);
        self.forward(zr, zi);
        let mut out = [
            vec![0.0; modes],
            vec![0.0; modes],
            vec![0.0; modes],
            vec![0.0; modes],
        ];
        for k in 0..modes {
            let nk = (n - k) % n;
            let (pr, pi) = (zr[k], zi[k]);
            let (qr, qi) = (zr[nk], -zi[nk]);
            // A = (Z_k + conj Z_{N-k}) / 2, B = (Z_k - conj Z_{N-k}) / 2i
            out[0][k] = 0.5 * (pr + qr);
            out[1][k] = 0.5 * (pi + qi);
            out[2][k] = 0.5 * (pi - qi);
            out[3][k] = -0.5 * (pr - qr);
        }
        out
    }

    /// Unnormalised Hermitian synthesis of two real signals from one-sided spectra:
    /// `s[n] = Re c_0 + 2 sum_{k=1}^{m-1} Re(c_k exp(2 pi i k n / N))`.
    ///
    /// Requires `m <= N / 2`.
    pub(crate) fn hermitian_synthesis_pair(
        &self,
        a: (&[f64], &[f64]),
        b: (&[f64], &[f64]),
        out_a: &mut [f64],
        out_b: &mut [f64],
        scratch: &mut (Vec<f64>, Vec<f64>),
    ) {
        let n = self.n;
        let modes = a.0.len();
        debug_assert!(modes <= n / 2);
        let (zr, zi) = scratch;
        zr.clear();
        zr.resize(n, 0.0);
        zi.clear();
        zi.resize(n, 0.0);
        // Z = H_a + i H_b with H Hermitian; H_0 real.
        zr[0] = a.0[0];
        zi[0] = b.0[0];
        for k in 1..modes {
            let (ar, ai) = (a.0[k], a.1[k]);
            let (br, bi) = (b.0[k], b.1[k]);
            zr[k] = ar - bi;
            zi[k] = ai + br;
            zr[n - k] = ar + bi;
            zi[n - k] = -ai + br;
        }
        self.transform(zr, zi, true);
        out_a.copy_from_slice(zr);
        out_b.copy_from_slice(zi);
    }
}
