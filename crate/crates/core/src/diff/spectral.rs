//! Truncated Fourier-space channel mixing along the time axis.
//!
//! Layout: input rows are `sample * len + t`, columns are channels. Each
//! channel series is edge-padded to the next power of two, transformed,
//! the lowest `modes` coefficients are mixed by complex weights
//! `w[in][out][k]`, and the Hermitian inverse is cropped back to `len`.

use crate::diff::fft::FftPlan;
use crate::diff::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralShape {
    pub batch: usize,
    pub len: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub modes: usize,
}

impl SpectralShape {
    pub fn padded_len(&self) -> usize {
        self.len.next_power_of_two()
    }

    pub(crate) fn validate(&self, x: &Tensor, w_re: &Tensor, w_im: &Tensor) -> Result<()> {
        let (rows, cols) = x.dims2()?;
        if rows != self.batch * self.len || cols != self.in_channels {
            return Err(Error::shape(
                "spectral_conv",
                format!(
                    "input {:?} vs batch {} x len {} x {} channels",
                    x.shape(),
                    self.batch,
                    self.len,
                    self.in_channels
                ),
            ));
        }
        let want = [self.in_channels, self.out_channels, self.modes];
        if w_re.shape() != want || w_im.shape() != want {
            return Err(Error::shape(
                "spectral_conv",
                format!("weights {:?}/{:?}, expected {want:?}", w_re.shape(), w_im.shape()),
            ));
        }
        if self.modes == 0 || self.modes > self.len / 2 {
            return Err(Error::invalid(format!(
                "modes must lie in 1..={}, got {}",
                self.len / 2,
                self.modes
            )));
        }
        Ok(())
    }
}

/// Forward spectra of the input, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct SpectralCache {
    pub(crate) shape: SpectralShape,
    x_re: Vec<f64>,
    x_im: Vec<f64>,
}

fn gather_padded(x: &[f64], shape: &SpectralShape, b: usize, c: usize, out: &mut [f64]) {
    let n = shape.len;
    let stride = shape.in_channels;
    for t in 0..n {
        out[t] = x[(b * n + t) * stride + c];
    }
    let edge = out[n - 1];
    out[n..].fill(edge);
}

pub(crate) fn forward(
    x: &Tensor,
    w_re: &Tensor,
    w_im: &Tensor,
    shape: SpectralShape,
) -> Result<(Tensor, SpectralCache)> {
    shape.validate(x, w_re, w_im)?;
    let SpectralShape {
        batch,
        len,
        in_channels: cin,
        out_channels: cout,
        modes,
    } = shape;
    let npad = shape.padded_len();
    let plan = FftPlan::new(npad)?;
    let xd = x.data();
    let (wr, wi) = (w_re.data(), w_im.data());

    let mut x_re = vec![0.0; batch * cin * modes];
    let mut x_im = vec![0.0; batch * cin * modes];
    let mut out = vec![0.0; batch * len * cout];
    let mut scratch = (Vec::with_capacity(npad), Vec::with_capacity(npad));
    let mut pa = vec![0.0; npad];
    let mut pb = vec![0.0; npad];
    let mut y_re = vec![0.0; cout * modes];
    let mut y_im = vec![0.0; cout * modes];
    let mut sa = vec![0.0; npad];
    let mut sb = vec![0.0; npad];
    let zeros = vec![0.0; modes];
    let inv_n = 1.0 / npad as f64;

    for b in 0..batch {
        let base = b * cin * modes;
        let mut c = 0;
        while c < cin {
            gather_padded(xd, &shape, b, c, &mut pa);
            if c + 1 < cin {
                gather_padded(xd, &shape, b, c + 1, &mut pb);
            } else {
                pb.fill(0.0);
            }
            let [ar, ai, br, bi] = plan.half_spectrum_pair(&pa, &pb, modes, &mut scratch);
            x_re[base + c * modes..base + (c + 1) * modes].copy_from_slice(&ar);
            x_im[base + c * modes..base + (c + 1) * modes].copy_from_slice(&ai);
            if c + 1 < cin {
                x_re[base + (c + 1) * modes..base + (c + 2) * modes].copy_from_slice(&br);
                x_im[base + (c + 1) * modes..base + (c + 2) * modes].copy_from_slice(&bi);
            }
            c += 2;
        }

        y_re.fill(0.0);
        y_im.fill(0.0);
        for i in 0..cin {
            let xr = &x_re[base + i * modes..base + (i + 1) * modes];
            let xi = &x_im[base + i * modes..base + (i + 1) * modes];
            for o in 0..cout {
                let w0 = (i * cout + o) * modes;
                let yr = &mut y_re[o * modes..(o + 1) * modes];
                for k in 0..modes {
                    yr[k] += xr[k] * wr[w0 + k] - xi[k] * wi[w0 + k];
                }
                let yi = &mut y_im[o * modes..(o + 1) * modes];
                for k in 0..modes {
                    yi[k] += xr[k] * wi[w0 + k] + xi[k] * wr[w0 + k];
                }
            }
        }
        for v in y_re.iter_mut().chain(y_im.iter_mut()) {
            *v *= inv_n;
        }

        let mut o = 0;
        while o < cout {
            let a = (&y_re[o * modes..(o + 1) * modes], &y_im[o * modes..(o + 1) * modes]);
            let bpair = if o + 1 < cout {
                (
                    &y_re[(o + 1) * modes..(o + 2) * modes],
                    &y_im[(o + 1) * modes..(o + 2) * modes],
                )
            } else {
                (&zeros[..], &zeros[..])
            };
            plan.hermitian_synthesis_pair(a, bpair, &mut sa, &mut sb, &mut scratch);
            for t in 0..len {
                out[(b * len + t) * cout + o] = sa[t];
                if o + 1 < cout {
                    out[(b * len + t) * cout + o + 1] = sb[t];
                }
            }
            o += 2;
        }
    }

    let out = Tensor::new(vec![batch * len, cout], out)?;
    Ok((out, SpectralCache { shape, x_re, x_im }))
}

/// Returns `(grad_x, grad_w_re, grad_w_im)`.
pub(crate) fn backward(
    grad: &Tensor,
    w_re: &Tensor,
    w_im: &Tensor,
    cache: &SpectralCache,
) -> Result<(Tensor, Tensor, Tensor)> {
    let shape = cache.shape;
    let SpectralShape {
        batch,
        len,
        in_channels: cin,
        out_channels: cout,
        modes,
    } = shape;
    let npad = shape.padded_len();
    let plan = FftPlan::new(npad)?;
    let g = grad.data();
    let (wr, wi) = (w_re.data(), w_im.data());

    let mut gx = vec![0.0; batch * len * cin];
    let mut gwr = vec![0.0; cin * cout * modes];
    let mut gwi = vec![0.0; cin * cout * modes];
    let mut scratch = (Vec::with_capacity(npad), Vec::with_capacity(npad));
    let mut pa = vec![0.0; npad];
    let mut pb = vec![0.0; npad];
    let mut yb_re = vec![0.0; cout * modes];
    let mut yb_im = vec![0.0; cout * modes];
    let mut xb_re = vec![0.0; cin * modes];
    let mut xb_im = vec![0.0; cin * modes];
    let mut sa = vec![0.0; npad];
    let mut sb = vec![0.0; npad];
    let zeros = vec![0.0; modes];
    let inv_n = 1.0 / npad as f64;

    for b in 0..batch {
        // Adjoint of the Hermitian synthesis: Ybar_k = c_k / N * FFT(g_pad)_k.
        let mut o = 0;
        while o < cout {
            pa.fill(0.0);
            pb.fill(0.0);
            for t in 0..len {
                pa[t] = g[(b * len + t) * cout + o];
                if o + 1 < cout {
                    pb[t] = g[(b * len + t) * cout + o + 1];
                }
            }
            let [ar, ai, br, bi] = plan.half_spectrum_pair(&pa, &pb, modes, &mut scratch);
            for k in 0..modes {
                let ck = if k == 0 { inv_n } else { 2.0 * inv_n };
                yb_re[o * modes + k] = ck * ar[k];
                yb_im[o * modes + k] = ck * ai[k];
                if o + 1 < cout {
                    yb_re[(o + 1) * modes + k] = ck * br[k];
                    yb_im[(o + 1) * modes + k] = ck * bi[k];
                }
            }
            o += 2;
        }

        let base = b * cin * modes;
        xb_re.fill(0.0);
        xb_im.fill(0.0);
        for i in 0..cin {
            let xr = &cache.x_re[base + i * modes..base + (i + 1) * modes];
            let xi = &cache.x_im[base + i * modes..base + (i + 1) * modes];
            for o in 0..cout {
                let w0 = (i * cout + o) * modes;
                let ybr = &yb_re[o * modes..(o + 1) * modes];
                let ybi = &yb_im[o * modes..(o + 1) * modes];
                for k in 0..modes {
                    gwr[w0 + k] += ybr[k] * xr[k] + ybi[k] * xi[k];
                    gwi[w0 + k] += ybi[k] * xr[k] - ybr[k] * xi[k];
                    xb_re[i * modes + k] += ybr[k] * wr[w0 + k] + ybi[k] * wi[w0 + k];
                    xb_im[i * modes + k] += ybi[k] * wr[w0 + k] - ybr[k] * wi[w0 + k];
                }
            }
        }
        // Synthesis form expects c_k halved for k >= 1.
        for i in 0..cin {
            for k in 1..modes {
                xb_re[i * modes + k] *= 0.5;
                xb_im[i * modes + k] *= 0.5;
            }
        }

        let mut c = 0;
        while c < cin {
            let a = (&xb_re[c * modes..(c + 1) * modes], &xb_im[c * modes..(c + 1) * modes]);
            let bpair = if c + 1 < cin {
                (
                    &xb_re[(c + 1) * modes..(c + 2) * modes],
                    &xb_im[(c + 1) * modes..(c + 2) * modes],
                )
            } else {
                (&zeros[..], &zeros[..])
            };
            plan.hermitian_synthesis_pair(a, bpair, &mut sa, &mut sb, &mut scratch);
            for (ch, s) in [(c, &sa), (c + 1, &sb)] {
                if ch >= cin {
                    continue;
                }
                for t in 0..len {
                    gx[(b * len + t) * cin + ch] = s[t];
                }
                let tail: f64 = s[len..].iter().sum();
                gx[(b * len + len - 1) * cin + ch] += tail;
            }
            c += 2;
        }
    }

    Ok((
        Tensor::new(vec![batch * len, cin], gx)?,
        Tensor::new(vec![cin, cout, modes], gwr)?,
        Tensor::new(vec![cin, cout, modes], gwi)?,
    ))
}
