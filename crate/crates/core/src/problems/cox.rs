use super::Dataset;
use crate::error::{Error, Result};
use crate::oracle::{ExactOracle, SampleHandle, StochasticOracle};
use crate::point;

/// Cox partial likelihood
/// `f(w) = 1/n sum_i y_i { -x_i . w + log sum_{j in R_i} exp(x_j . w) }`.
///
/// Risk sets use `t_j >= t_i`; tied times are ordered by row index, so
/// `R_i = { j : t_j > t_i or (t_j == t_i and j >= i) }`. The stochastic
/// oracle draws one event uniformly and scales its term by `E / n`.
#[derive(Debug, Clone)]
pub struct Cox {
    x: Vec<f64>,
    n: usize,
    d: usize,
    /// Rows sorted by (time, index); the risk set of the row at position `p`
    /// is `order[p..]`.
    order: Vec<usize>,
    /// Position in `order` of every event row.
    event_positions: Vec<usize>,
}

/// Numerically stable running log-sum-exp.
#[derive(Clone, Copy)]
struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    fn new() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    /// Adds `exp(eta)`; returns the factor that rescales previously
    /// accumulated weights and the weight of the new term.
    fn push(&mut self, eta: f64) -> (f64, f64) {
        if eta > self.max {
            let rescale = if self.max == f64::NEG_INFINITY { 0.0 } else { (self.max - eta).exp() };
            self.sum = self.sum * rescale + 1.0;
            self.max = eta;
            (rescale, 1.0)
        } else {
            let w = (eta - self.max).exp();
            self.sum += w;
            (1.0, w)
        }
    }

    fn value(&self) -> f64 {
        self.max + self.sum.ln()
    }
}

impl Cox {
    pub fn new(data: &Dataset) -> Result<Self> {
        let surv = data
            .survival()
            .ok_or_else(|| Error::InvalidDataset("Cox model needs event indicators and times".into()))?;
        let mut order: Vec<usize> = (0..data.n()).collect();
        order.sort_by(|&a, &b| surv.times[a].total_cmp(&surv.times[b]).then(a.cmp(&b)));
        let event_positions: Vec<usize> = (0..order.len()).filter(|&p| surv.events[order[p]]).collect();
        if event_positions.is_empty() {
            return Err(Error::NoEvents);
        }
        Ok(Cox { x: data.features().to_vec(), n: data.n(), d: data.dim(), order, event_positions })
    }

    pub fn num_events(&self) -> usize {
        self.event_positions.len()
    }

    /// `(E / n) max_j |x_j|^2`, an upper bound on the gradient's Lipschitz constant.
    pub fn lipschitz_bound(&self) -> f64 {
        let max_sq = (0..self.n).map(|j| point::dot(self.row(j), self.row(j))).fold(0.0, f64::max);
        self.num_events() as f64 / self.n as f64 * max_sq
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    fn event_term(&self, w: &[f64], pos: usize) -> f64 {
        let mut lse = LogSumExp::new();
        for &j in &self.order[pos..] {
            lse.push(point::dot(self.row(j), w));
        }
        lse.value() - point::dot(self.row(self.order[pos]), w)
    }

    fn event_gradient(&self, w: &[f64], pos: usize, scale: f64, out: &mut [f64]) {
        let mut lse = LogSumExp::new();
        let mut weighted = vec![0.0; self.d];
        for &j in &self.order[pos..] {
            let (rescale, wj) = lse.push(point::dot(self.row(j), w));
            for (acc, xj) in weighted.iter_mut().zip(self.row(j)) {
                *acc = *acc * rescale + wj * xj;
            }
        }
        let xi = self.row(self.order[pos]);
        for ((o, a), xv) in out.iter_mut().zip(&weighted).zip(xi) {
            *o += scale * (a / lse.sum - xv);
        }
    }
}

impl StochasticOracle for Cox {
    fn dim(&self) -> usize {
        self.d
    }

    fn query(&self, w: &[f64], sample: SampleHandle) -> f64 {
        let e = self.num_events();
        let pos = self.event_positions[sample.index(e)];
        e as f64 / self.n as f64 * self.event_term(w, pos)
    }

    fn stochastic_gradient(&self, w: &[f64], sample: SampleHandle) -> Option<Vec<f64>> {
        let e = self.num_events();
        let pos = self.event_positions[sample.index(e)];
        let mut g = vec![0.0; self.d];
        self.event_gradient(w, pos, e as f64 / self.n as f64, &mut g);
        Some(g)
    }
}

impl ExactOracle for Cox {
    fn value(&self, w: &[f64]) -> f64 {
        // one backward sweep accumulates every suffix log-sum-exp
        let mut lse = LogSumExp::new();
        let mut total = 0.0;
        let mut next_event = self.event_positions.len();
        for p in (0..self.n).rev() {
            let i = self.order[p];
            let eta = point::dot(self.row(i), w);
            lse.push(eta);
            if next_event > 0 && self.event_positions[next_event - 1] == p {
                next_event -= 1;
                total += lse.value() - eta;
            }
        }
        total / self.n as f64
    }

    fn gradient(&self, w: &[f64]) -> Option<Vec<f64>> {
        let mut lse = LogSumExp::new();
        let mut weighted = vec![0.0; self.d];
        let mut g = vec![0.0; self.d];
        let mut next_event = self.event_positions.len();
        let inv_n = 1.0 / self.n as f64;
        for p in (0..self.n).rev() {
            let i = self.order[p];
            let xi = self.row(i);
            let (rescale, wi) = lse.push(point::dot(xi, w));
            for (acc, xv) in weighted.iter_mut().zip(xi) {
                *acc = *acc * rescale + wi * xv;
            }
            if next_event > 0 && self.event_positions[next_event - 1] == p {
                next_event -= 1;
                for ((gk, a), xv) in g.iter_mut().zip(&weighted).zip(xi) {
                    *gk += inv_n * (a / lse.sum - xv);
                }
            }
        }
        Some(g)
    }
}
