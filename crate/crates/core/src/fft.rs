//! Multi-dimensional complex FFT on row-major periodic cubes.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place transform along every axis. The inverse is unnormalized.
pub(crate) fn fft_nd(data: &mut [Complex64], dims: usize, side: usize, inverse: bool) {
    debug_assert_eq!(data.len(), side.pow(dims as u32));
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(side)
    } else {
        planner.plan_fft_forward(side)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..dims {
        // the last axis is contiguous
        let stride = side.pow((dims - 1 - axis) as u32);
        let block = stride * side;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[start + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
        }
    }
}

pub(crate) fn forward_real(values: &[f64], dims: usize, side: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut buf, dims, side, false);
    buf
}

/// Inverse transform, normalized, keeping the real part.
pub(crate) fn inverse_real(mut spec: Vec<Complex64>, dims: usize, side: usize) -> Vec<f64> {
    fft_nd(&mut spec, dims, side, true);
    let n = spec.len() as f64;
    spec.into_iter().map(|c| c.re / n).collect()
}

/// Signed frequency index in `[-side/2, side/2)`.
pub(crate) fn signed(m: usize, side: usize) -> isize {
    if m >= side / 2 && side > 1 && m * 2 >= side {
        m as isize - side as isize
    } else {
        m as isize
    }
}

/// Integer wavevector components of flat index `i`.
pub(crate) fn mode(i: usize, dims: usize, side: usize) -> [isize; 3] {
    let mut out = [0isize; 3];
    let mut rest = i;
    for a in (0..dims).rev() {
        out[a] = signed(rest % side, side);
        rest /= side;
    }
    out
}
