use std::fmt;
use std::io::{BufRead, Write};

use super::gaussian::Gaussian;
use super::HmmError;

/// Tolerance on row sums of the transition matrix and on `π`.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// A `T×D` observation sequence stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    dim: usize,
    data: Vec<f64>,
}

impl Sequence {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, HmmError> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(HmmError::DimensionMismatch {
                expected: dim,
                actual: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn univariate(values: Vec<f64>) -> Self {
        Self { dim: 1, data: values }
    }

    /// Interleaves equal-length channels into one multivariate sequence.
    pub fn from_channels(channels: &[&[f64]]) -> Result<Self, HmmError> {
        let dim = channels.len();
        let len = channels.first().map_or(0, |c| c.len());
        if dim == 0 {
            return Err(HmmError::DimensionMismatch { expected: 1, actual: 0 });
        }
        if let Some(c) = channels.iter().find(|c| c.len() != len) {
            return Err(HmmError::DimensionMismatch {
                expected: len,
                actual: c.len(),
            });
        }
        let mut data = Vec::with_capacity(dim * len);
        for t in 0..len {
            data.extend(channels.iter().map(|c| c[t]));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn obs(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn channel(&self, k: usize) -> Vec<f64> {
        self.data.iter().skip(k).step_by(self.dim).copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + Clone {
        self.data.chunks_exact(self.dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Each state may only stay or advance to the next one.
    LeftRight,
    Ergodic,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::LeftRight => "left-right",
            Topology::Ergodic => "ergodic",
        })
    }
}

impl std::str::FromStr for Topology {
    type Err = HmmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "left-right" => Ok(Topology::LeftRight),
            "ergodic" => Ok(Topology::Ergodic),
            other => Err(HmmError::InvalidModel(format!("unknown topology `{other}`"))),
        }
    }
}

/// Continuous-emission HMM `λ = (A, B, π)` with one Gaussian per state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianHmm {
    topology: Topology,
    initial: Vec<f64>,
    transitions: Vec<f64>,
    emissions: Vec<Gaussian>,
}

impl GaussianHmm {
    /// `transitions` is the row-major `N×N` matrix `a_ij = P(j | i)`.
    pub fn new(
        topology: Topology,
        initial: Vec<f64>,
        transitions: Vec<f64>,
        emissions: Vec<Gaussian>,
    ) -> Result<Self, HmmError> {
        let n = emissions.len();
        if n == 0 {
            return Err(HmmError::InvalidModel("model needs at least one state".into()));
        }
        if initial.len() != n || transitions.len() != n * n {
            return Err(HmmError::DimensionMismatch {
                expected: n,
                actual: initial.len(),
            });
        }
        let dim = emissions[0].dim();
        if let Some(g) = emissions.iter().find(|g| g.dim() != dim) {
            return Err(HmmError::DimensionMismatch {
                expected: dim,
                actual: g.dim(),
            });
        }
        check_distribution(&initial, "initial distribution")?;
        for i in 0..n {
            check_distribution(&transitions[i * n..(i + 1) * n], &format!("transition row {i}"))?;
        }
        if topology == Topology::LeftRight {
            if initial[0] != 1.0 {
                return Err(HmmError::InvalidModel("left-right model must start in state 0".into()));
            }
            for i in 0..n {
                for j in 0..n {
                    if (j < i || j > i + 1) && transitions[i * n + j] != 0.0 {
                        return Err(HmmError::InvalidModel(format!(
                            "left-right model has forbidden transition {i}->{j}"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            topology,
            initial,
            transitions,
            emissions,
        })
    }

    /// Left-right chain with `a_ii = a_i,i+1 = 0.5` and an absorbing last state.
    pub fn left_right(emissions: Vec<Gaussian>) -> Result<Self, HmmError> {
        let n = emissions.len();
        let mut initial = vec![0.0; n];
        if n > 0 {
            initial[0] = 1.0;
        }
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            if i + 1 < n {
                a[i * n + i] = 0.5;
                a[i * n + i + 1] = 0.5;
            } else {
                a[i * n + i] = 1.0;
            }
        }
        Self::new(Topology::LeftRight, initial, a, emissions)
    }

    pub fn n_states(&self) -> usize {
        self.emissions.len()
    }

    pub fn dim(&self) -> usize {
        self.emissions[0].dim()
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.transitions[i * self.n_states() + j]
    }

    pub fn emissions(&self) -> &[Gaussian] {
        &self.emissions
    }

    pub(crate) fn check_sequence(&self, seq: &Sequence) -> Result<(), HmmError> {
        if seq.is_empty() {
            return Err(HmmError::EmptySequence);
        }
        if seq.dim() != self.dim() {
            return Err(HmmError::DimensionMismatch {
                expected: self.dim(),
                actual: seq.dim(),
            });
        }
        Ok(())
    }

    /// Writes the model as text: `n_states,dim,topology`, the `π` line, `N`
    /// transition rows and `N` emission lines (mean, then row-major
    /// covariance). Numbers carry 17 significant digits.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), HmmError> {
        let n = self.n_states();
        writeln!(w, "{},{},{}", n, self.dim(), self.topology)?;
        writeln!(w, "{}", join(&self.initial))?;
        for i in 0..n {
            writeln!(w, "{}", join(&self.transitions[i * n..(i + 1) * n]))?;
        }
        for g in &self.emissions {
            let vals: Vec<f64> = g.mean().iter().chain(g.cov()).copied().collect();
            writeln!(w, "{}", join(&vals))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, HmmError> {
        let lines: Vec<String> = r
            .lines()
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .filter(|l| !l.trim().is_empty())
            .collect();
        let perr = |line: usize, message: String| HmmError::Parse { line, message };
        let header = lines.first().ok_or_else(|| perr(1, "missing header".into()))?;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(perr(1, "header must be `n_states,dim,topology`".into()));
        }
        let n: usize = fields[0].parse().map_err(|e| perr(1, format!("n_states: {e}")))?;
        let dim: usize = fields[1].parse().map_err(|e| perr(1, format!("dim: {e}")))?;
        let topology: Topology = fields[2].parse()?;
        if lines.len() != 2 + 2 * n {
            return Err(perr(
                lines.len() + 1,
                format!("expected {} lines for {n} states, found {}", 2 + 2 * n, lines.len()),
            ));
        }
        let parse_line = |idx: usize, want: usize| -> Result<Vec<f64>, HmmError> {
            let vals = lines[idx]
                .trim()
                .split(',')
                .map(str::parse::<f64>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| perr(idx + 1, e.to_string()))?;
            if vals.len() != want {
                return Err(perr(idx + 1, format!("expected {want} values, found {}", vals.len())));
            }
            Ok(vals)
        };
        let initial = parse_line(1, n)?;
        let mut transitions = Vec::with_capacity(n * n);
        for i in 0..n {
            transitions.extend(parse_line(2 + i, n)?);
        }
        let mut emissions = Vec::with_capacity(n);
        for i in 0..n {
            let mut vals = parse_line(2 + n + i, dim + dim * dim)?;
            let cov = vals.split_off(dim);
            emissions.push(Gaussian::new(vals, cov)?);
        }
        Self::new(topology, initial, transitions, emissions)
    }
}

fn join(vals: &[f64]) -> String {
    vals.iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn check_distribution(p: &[f64], what: &str) -> Result<(), HmmError> {
    if p.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(HmmError::InvalidModel(format!("{what} has a negative or non-finite entry")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(HmmError::InvalidModel(format!("{what} sums to {sum}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple(n: usize) -> GaussianHmm {
        let em = (0..n)
            .map(|i| Gaussian::univariate(i as f64, 0.5).unwrap())
            .collect();
        GaussianHmm::left_right(em).unwrap()
    }

    #[test]
    fn left_right_layout() {
        let m = simple(3);
        assert_eq!(m.initial(), &[1.0, 0.0, 0.0]);
        assert_eq!(m.transition(0, 0), 0.5);
        assert_eq!(m.transition(0, 1), 0.5);
        assert_eq!(m.transition(0, 2), 0.0);
        assert_eq!(m.transition(2, 2), 1.0);
    }

    #[test]
    fn validation_catches_bad_rows_and_topology() {
        let em = || vec![Gaussian::univariate(0.0, 1.0).unwrap(), Gaussian::univariate(1.0, 1.0).unwrap()];
        assert!(GaussianHmm::new(Topology::Ergodic, vec![0.5, 0.5], vec![0.6, 0.6, 0.5, 0.5], em()).is_err());
        assert!(GaussianHmm::new(Topology::LeftRight, vec![1.0, 0.0], vec![0.5, 0.5, 0.5, 0.5], em()).is_err());
        assert!(GaussianHmm::new(Topology::LeftRight, vec![0.5, 0.5], vec![0.5, 0.5, 0.0, 1.0], em()).is_err());
        assert!(GaussianHmm::new(Topology::Ergodic, vec![0.5, 0.5], vec![0.5, 0.5, 0.5, 0.5], em()).is_ok());
    }

    #[test]
    fn sequence_channels() {
        let s = Sequence::from_channels(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.obs(1), &[2.0, 5.0]);
        assert_eq!(s.channel(1), vec![4.0, 5.0, 6.0]);
        assert!(Sequence::from_channels(&[&[1.0], &[1.0, 2.0]]).is_err());
    }

    #[test]
    fn model_file_round_trip_is_bit_exact() {
        let em = vec![
            Gaussian::new(vec![0.1, -2.0 / 3.0], vec![1.0 / 3.0, 0.01, 0.01, 0.7]).unwrap(),
            Gaussian::new(vec![1e-300, 5.0], vec![2.0, -0.3, -0.3, 1.5]).unwrap(),
        ];
        let m = GaussianHmm::new(Topology::LeftRight, vec![1.0, 0.0], vec![0.3, 0.7, 0.0, 1.0], em).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("2,2,left-right\n"));
        let back = GaussianHmm::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.emissions().iter().zip(m.emissions()) {
            assert!(a.mean().iter().zip(b.mean()).all(|(x, y)| x.to_bits() == y.to_bits()));
            assert!(a.cov().iter().zip(b.cov()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}
