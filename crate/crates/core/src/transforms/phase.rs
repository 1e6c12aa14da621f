use num_complex::Complex64;

const LANES: usize = 4;
/// Nodes between exact re-evaluations of the phase.
const ANCHOR: usize = 64;

#[inline]
fn cis(angle: f64) -> Complex64 {
    let (s, c) = angle.sin_cos();
    Complex64::new(c, s)
}

/// `sum_i Re[c_i exp(-i (first + i) dw k)]`.
///
/// The phases are advanced by complex multiplication in four interleaved
/// lanes and re-anchored with an exact `sin_cos` every 64 nodes, so the
/// recurrence error never accumulates beyond a few dozen ulps.
#[cfg(test)]
pub(crate) fn phase_sum(coeffs: &[Complex64], first: usize, dw: f64, k: f64) -> f64 {
    sum_lanes::<false>(coeffs, &[], first, dw, k).0
}

/// Two phase sums over the same nodes, sharing the phase recurrence.
pub(crate) fn phase_sum_pair(
    a: &[Complex64],
    b: &[Complex64],
    first: usize,
    dw: f64,
    k: f64,
) -> (f64, f64) {
    assert_eq!(a.len(), b.len(), "paired coefficient vectors differ in length");
    sum_lanes::<true>(a, b, first, dw, k)
}

#[inline(always)]
fn sum_lanes<const PAIRED: bool>(
    a: &[Complex64],
    b: &[Complex64],
    first: usize,
    dw: f64,
    k: f64,
) -> (f64, f64) {
    let theta = -dw * k;
    let one = cis(theta);
    let mut step = one;
    for _ in 1..LANES {
        step *= one;
    }
    let mut re_a = [0.0f64; LANES];
    let mut re_b = [0.0f64; LANES];
    for (blk, block) in a.chunks(ANCHOR).enumerate() {
        let base = blk * ANCHOR;
        let start = cis(theta * (first + base) as f64);
        let mut pr = [0.0f64; LANES];
        let mut pi = [0.0f64; LANES];
        let mut p = start;
        for l in 0..LANES {
            pr[l] = p.re;
            pi[l] = p.im;
            p *= one;
        }
        let other = if PAIRED { &b[base..base + block.len()] } else { &[][..] };
        let mut groups = block.chunks_exact(LANES);
        let mut i = 0;
        for group in &mut groups {
            for l in 0..LANES {
                let c = group[l];
                re_a[l] += c.re * pr[l] - c.im * pi[l];
                if PAIRED {
                    let d = other[i + l];
                    re_b[l] += d.re * pr[l] - d.im * pi[l];
                }
                let (r, m) = (pr[l], pi[l]);
                pr[l] = r * step.re - m * step.im;
                pi[l] = r * step.im + m * step.re;
            }
            i += LANES;
        }
        for (l, c) in groups.remainder().iter().enumerate() {
            re_a[l] += c.re * pr[l] - c.im * pi[l];
            if PAIRED {
                let d = other[i + l];
                re_b[l] += d.re * pr[l] - d.im * pi[l];
            }
        }
    }
    (re_a.iter().sum(), re_b.iter().sum())
}

/// Strikes priced together by [`phase_sums`].
const STRIKES: usize = 4;

/// The phase sum for many `k` at once. Four values of `k` share every
/// coefficient load, and each runs four interleaved phase lanes, which keeps
/// sixteen independent recurrences in flight.
pub(crate) fn phase_sums(coeffs: &[Complex64], first: usize, dw: f64, ks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ks.len());
    for group in ks.chunks(STRIKES) {
        let mut k = [group[0]; STRIKES];
        k[..group.len()].copy_from_slice(group);
        let sums = sum_strikes(coeffs, first, dw, &k);
        out.extend_from_slice(&sums[..group.len()]);
    }
    out
}

fn sum_strikes(coeffs: &[Complex64], first: usize, dw: f64, k: &[f64; STRIKES]) -> [f64; STRIKES] {
    let mut one = [Complex64::new(1.0, 0.0); STRIKES];
    let mut step_re = [0.0f64; STRIKES];
    let mut step_im = [0.0f64; STRIKES];
    for s in 0..STRIKES {
        one[s] = cis(-dw * k[s]);
        let two = one[s] * one[s];
        let four = two * two;
        step_re[s] = four.re;
        step_im[s] = four.im;
    }
    let mut acc = [[0.0f64; STRIKES]; LANES];
    for (blk, block) in coeffs.chunks(ANCHOR).enumerate() {
        let node = (first + blk * ANCHOR) as f64;
        let mut pr = [[0.0f64; STRIKES]; LANES];
        let mut pi = [[0.0f64; STRIKES]; LANES];
        for s in 0..STRIKES {
            let mut p = cis(-dw * k[s] * node);
            for l in 0..LANES {
                pr[l][s] = p.re;
                pi[l][s] = p.im;
                p *= one[s];
            }
        }
        let mut groups = block.chunks_exact(LANES);
        for group in &mut groups {
            for l in 0..LANES {
                let (cr, ci) = (group[l].re, group[l].im);
                for s in 0..STRIKES {
                    acc[l][s] += cr * pr[l][s] - ci * pi[l][s];
                    let (r, m) = (pr[l][s], pi[l][s]);
                    pr[l][s] = r * step_re[s] - m * step_im[s];
                    pi[l][s] = r * step_im[s] + m * step_re[s];
                }
            }
        }
        for (l, c) in groups.remainder().iter().enumerate() {
            for s in 0..STRIKES {
                acc[l][s] += c.re * pr[l][s] - c.im * pi[l][s];
            }
        }
    }
    let mut out = [0.0f64; STRIKES];
    for s in 0..STRIKES {
        out[s] = (acc[0][s] + acc[1][s]) + (acc[2][s] + acc[3][s]);
    }
    out
}
