//! Correlation matrix and vector assembly.
//!
//! Observations are ordered segment by segment. Inside a segment holding
//! sites `s_1..s_p` the order is the values of all sites, then the first
//! partial derivatives of all sites, and so on up to dimension `n`. A single
//! segment spanning every site gives the conventional GEK ordering
//! `[y0; y1; ...; yn]`.

use faer::Mat;

use crate::kernels::PairBlock;
use crate::sampling::SampleSet;

/// Observations carried by one site.
fn per_site(dim: usize, gradients: bool) -> usize {
    if gradients {
        dim + 1
    } else {
        1
    }
}

/// Row/column position of observation `obs` (0 = value, `k + 1` = partial
/// derivative `k`) for every site slot of a list of segments.
pub(crate) struct Ordering {
    /// `(sample index, segment start, segment length, local index)` per slot.
    slots: Vec<(usize, usize, usize, usize)>,
    total: usize,
    per_site: usize,
}

impl Ordering {
    pub(crate) fn new(segments: &[&[usize]], dim: usize, gradients: bool) -> Self {
        let per_site = per_site(dim, gradients);
        let mut slots = Vec::new();
        let mut start = 0;
        for seg in segments {
            for (local, &sample) in seg.iter().enumerate() {
                slots.push((sample, start, seg.len(), local));
            }
            start += seg.len() * per_site;
        }
        Self {
            slots,
            total: start,
            per_site,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.total
    }

    #[inline]
    fn position(&self, slot: usize, obs: usize) -> usize {
        let (_, start, len, local) = self.slots[slot];
        start + obs * len + local
    }

    /// Observed responses in this ordering.
    pub(crate) fn responses(&self, data: &SampleSet) -> Vec<f64> {
        let mut y = vec![0.0; self.total];
        for slot in 0..self.slots.len() {
            let sample = self.slots[slot].0;
            y[self.position(slot, 0)] = data.value(sample);
            if self.per_site > 1 {
                let g = data
                    .gradient(sample)
                    .expect("gradient ordering needs gradients");
                for (k, gk) in g.iter().enumerate() {
                    y[self.position(slot, k + 1)] = *gk;
                }
            }
        }
        y
    }

    /// Regression vector for a constant trend: 1 at value observations.
    pub(crate) fn trend(&self) -> Vec<f64> {
        let mut f = vec![0.0; self.total];
        for slot in 0..self.slots.len() {
            f[self.position(slot, 0)] = 1.0;
        }
        f
    }

    /// Correlation matrix between all observations.
    pub(crate) fn matrix(&self, data: &SampleSet, theta: &[f64]) -> Mat<f64> {
        let gradients = self.per_site > 1;
        let width = self.per_site;
        let mut m = Mat::zeros(self.total, self.total);
        let mut pb = PairBlock::new(data.dim());
        for a in 0..self.slots.len() {
            let xa = data.site(self.slots[a].0);
            for b in 0..=a {
                let xb = data.site(self.slots[b].0);
                if !pb.fill(xa, xb, theta, gradients) {
                    continue;
                }
                for p in 0..width {
                    let row = self.position(a, p);
                    for q in 0..width {
                        let col = self.position(b, q);
                        let v = pb.block[p * width + q];
                        m[(row, col)] = v;
                        m[(col, row)] = v;
                    }
                }
            }
        }
        m
    }

    /// Correlation between the value at `x` and every observation.
    pub(crate) fn vector(&self, x: &[f64], data: &SampleSet, theta: &[f64]) -> Vec<f64> {
        let gradients = self.per_site > 1;
        let mut r = vec![0.0; self.total];
        let mut pb = PairBlock::new(data.dim());
        for slot in 0..self.slots.len() {
            if !pb.fill_value_row(x, data.site(self.slots[slot].0), theta, gradients) {
                continue;
            }
            for q in 0..self.per_site {
                r[self.position(slot, q)] = pb.block[q];
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::DomainBox;

    #[test]
    fn segment_positions() {
        let segs: [&[usize]; 2] = [&[2, 0], &[1]];
        let o = Ordering::new(&segs, 2, true);
        assert_eq!(o.len(), 9);
        assert_eq!(o.position(0, 0), 0);
        assert_eq!(o.position(1, 0), 1);
        assert_eq!(o.position(0, 1), 2);
        assert_eq!(o.position(1, 2), 5);
        assert_eq!(o.position(2, 0), 6);
        assert_eq!(o.position(2, 2), 8);
        let f = o.trend();
        assert_eq!(f, vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn responses_follow_ordering() {
        let data = SampleSet::from_unit(
            DomainBox::unit(1).unwrap(),
            &[vec![0.1], vec![0.7]],
            vec![3.0, 4.0],
            Some(&[vec![-1.0], vec![2.0]]),
        )
        .unwrap();
        let o = Ordering::new(&[&[0, 1]], 1, true);
        assert_eq!(o.responses(&data), vec![3.0, 4.0, -1.0, 2.0]);
        let swapped = Ordering::new(&[&[1], &[0]], 1, true);
        assert_eq!(swapped.responses(&data), vec![4.0, 2.0, 3.0, -1.0]);
    }
}
