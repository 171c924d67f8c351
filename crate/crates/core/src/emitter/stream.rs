//! Seeded photon-arrival streams with known statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates are in 1/ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StreamKind {
    /// Two-level cycle: exponential wait for excitation, then for decay;
    /// one photon per cycle.
    SingleEmitter {
        excitation_rate: f64,
        decay_rate: f64,
    },
    Poisson {
        rate: f64,
    },
}

impl StreamKind {
    fn name(&self) -> &'static str {
        match self {
            Self::SingleEmitter { .. } => "single_emitter",
            Self::Poisson { .. } => "poisson",
        }
    }
}

/// Strictly increasing arrival times in `[0, duration_ns)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonStream {
    pub timestamps_ns: Vec<f64>,
    pub duration_ns: f64,
    pub generator: String,
    pub seed: u64,
}

impl PhotonStream {
    pub fn new(
        timestamps_ns: Vec<f64>,
        duration_ns: f64,
        generator: impl Into<String>,
        seed: u64,
    ) -> Result<Self> {
        if !(duration_ns > 0.0 && duration_ns.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "stream duration must be positive (got {duration_ns})"
            )));
        }
        if let Some(w) = timestamps_ns.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!(
                "timestamps not strictly increasing at {} ns",
                w[1]
            )));
        }
        if let (Some(&first), Some(&last)) = (timestamps_ns.first(), timestamps_ns.last()) {
            if first < 0.0 || last >= duration_ns {
                return Err(Error::InvalidArgument(format!(
                    "timestamps must lie in [0, {duration_ns}) ns"
                )));
            }
        }
        Ok(Self {
            timestamps_ns,
            duration_ns,
            generator: generator.into(),
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps_ns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps_ns.is_empty()
    }

    /// Mean count rate in 1/ns.
    pub fn rate(&self) -> f64 {
        self.len() as f64 / self.duration_ns
    }
}

fn exp(rate: f64, what: &str) -> Result<Exp<f64>> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{what} must be positive (got {rate})"
        )));
    }
    Exp::new(rate).map_err(|e| Error::InvalidArgument(format!("{what}: {e}")))
}

pub fn simulate_stream(kind: StreamKind, duration_ns: f64, seed: u64) -> Result<PhotonStream> {
    if !(duration_ns > 0.0 && duration_ns.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "stream duration must be positive (got {duration_ns})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut t = 0.0;
    match kind {
        StreamKind::Poisson { rate } => {
            let wait = exp(rate, "rate")?;
            loop {
                t += wait.sample(&mut rng);
                if t >= duration_ns {
                    break;
                }
                out.push(t);
            }
        }
        StreamKind::SingleEmitter {
            excitation_rate,
            decay_rate,
        } => {
            let excite = exp(excitation_rate, "excitation rate")?;
            let decay = exp(decay_rate, "decay rate")?;
            loop {
                t += excite.sample(&mut rng) + decay.sample(&mut rng);
                if t >= duration_ns {
                    break;
                }
                out.push(t);
            }
        }
    }
    // Both waits are positive with probability one; a zero draw would only
    // repeat a timestamp.
    out.dedup();
    PhotonStream::new(out, duration_ns, kind.name(), seed)
}

/// Independent 50/50 routing of every click to one of two detectors.
pub fn beamsplitter(stream: &PhotonStream, seed: u64) -> (PhotonStream, PhotonStream) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for &t in &stream.timestamps_ns {
        if rng.gen_bool(0.5) {
            a.push(t);
        } else {
            b.push(t);
        }
    }
    let arm = |ts| PhotonStream {
        timestamps_ns: ts,
        duration_ns: stream.duration_ns,
        generator: format!("{}+beamsplitter", stream.generator),
        seed,
    };
    (arm(a), arm(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_count_within_three_sigma() {
        let (rate, dur) = (0.7, 2e5);
        let s = simulate_stream(StreamKind::Poisson { rate }, dur, 11).unwrap();
        let mean = rate * dur;
        assert!(
            (s.len() as f64 - mean).abs() < 3.0 * mean.sqrt(),
            "{}",
            s.len()
        );
        assert!(s.timestamps_ns.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn single_emitter_rate_matches_cycle_time() {
        let (a, b, dur) = (0.5, 1.0, 1e5);
        let s = simulate_stream(
            StreamKind::SingleEmitter {
                excitation_rate: a,
                decay_rate: b,
            },
            dur,
            5,
        )
        .unwrap();
        let want = dur / (1.0 / a + 1.0 / b);
        assert!((s.len() as f64 - want).abs() < 0.03 * want);
    }

    #[test]
    fn same_seed_same_stream() {
        let k = StreamKind::Poisson { rate: 1.0 };
        assert_eq!(
            simulate_stream(k, 1e3, 9).unwrap(),
            simulate_stream(k, 1e3, 9).unwrap()
        );
        assert_ne!(
            simulate_stream(k, 1e3, 9).unwrap().timestamps_ns,
            simulate_stream(k, 1e3, 10).unwrap().timestamps_ns
        );
    }

    #[test]
    fn splitter_partitions_clicks() {
        let s = simulate_stream(StreamKind::Poisson { rate: 1.0 }, 1e4, 1).unwrap();
        let (a, b) = beamsplitter(&s, 2);
        assert_eq!(a.len() + b.len(), s.len());
        let frac = a.len() as f64 / s.len() as f64;
        assert!((frac - 0.5).abs() < 0.03);
        let mut all = [a.timestamps_ns, b.timestamps_ns].concat();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, s.timestamps_ns);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(simulate_stream(StreamKind::Poisson { rate: 0.0 }, 1.0, 0).is_err());
        assert!(simulate_stream(StreamKind::Poisson { rate: 1.0 }, -1.0, 0).is_err());
        assert!(PhotonStream::new(vec![1.0, 1.0], 2.0, "x", 0).is_err());
        assert!(PhotonStream::new(vec![3.0], 2.0, "x", 0).is_err());
    }
}
