use super::ProbVector;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Unclipped scores with Adam moment estimates. The probabilities are
/// always `clip(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
    step: u64,
}

impl ScoreVector {
    /// Scores start at the probabilities themselves with zeroed moments.
    pub fn from_probs(p: &ProbVector) -> Self {
        let n = p.len();
        ScoreVector {
            scores: p.as_slice().to_vec(),
            first: vec![0.0; n],
            second: vec![0.0; n],
            step: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn probs(&self) -> ProbVector {
        ProbVector::from_unclipped(&self.scores)
    }

    /// One bias-corrected Adam descent step.
    pub fn adam_step(&mut self, grad: &[f64], learning_rate: f64) {
        debug_assert_eq!(grad.len(), self.scores.len());
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - BETA1.powi(t);
        let c2 = 1.0 - BETA2.powi(t);
        for (((s, m), v), &g) in self
            .scores
            .iter_mut()
            .zip(&mut self.first)
            .zip(&mut self.second)
            .zip(grad)
        {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *s -= learning_rate * m_hat / (v_hat.sqrt() + EPSILON);
        }
    }
}
