//! `--kernel` values: a file path or `random:<seed>:<cout>x<cin>x<s>`.

use std::path::PathBuf;
use std::str::FromStr;

use lipbound::io::{load_kernel, KernelFormat};
use lipbound::{random_kernel, Kernel, KernelDist};

#[derive(Debug, Clone, PartialEq)]
pub enum Seeds {
    One(u64),
    /// `*`: one kernel per repeat, seeds `0..repeats`.
    Each,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSource {
    File(PathBuf),
    Random {
        seeds: Seeds,
        cout: usize,
        cin: usize,
        s: usize,
    },
}

impl FromStr for KernelSource {
    type Err = String;

    fn from_str(spec: &str) -> Result<Self, String> {
        let Some(rest) = spec.strip_prefix("random:") else {
            return Ok(Self::File(PathBuf::from(spec)));
        };
        let (seed, shape) = rest
            .split_once(':')
            .ok_or_else(|| format!("expected random:<seed>:<cout>x<cin>x<s>, got `{spec}`"))?;
        let seeds = match seed {
            "*" => Seeds::Each,
            s => Seeds::One(s.parse().map_err(|_| format!("bad seed `{s}`"))?),
        };
        let dims: Vec<usize> = shape
            .split('x')
            .map(|d| d.parse().map_err(|_| format!("bad dimension `{d}` in `{shape}`")))
            .collect::<Result<_, _>>()?;
        let [cout, cin, s] = dims[..] else {
            return Err(format!("shape `{shape}` must be <cout>x<cin>x<s>"));
        };
        Ok(Self::Random {
            seeds,
            cout,
            cin,
            s,
        })
    }
}

impl KernelSource {
    /// Kernels this source stands for; `repeats` only matters for `*`.
    pub fn load(&self, repeats: usize) -> lipbound::Result<Vec<Kernel>> {
        match self {
            Self::File(path) => Ok(vec![load_kernel(path, KernelFormat::from_path(path))?]),
            Self::Random {
                seeds,
                cout,
                cin,
                s,
            } => {
                let list: Vec<u64> = match seeds {
                    Seeds::One(seed) => vec![*seed],
                    Seeds::Each => (0..repeats.max(1) as u64).collect(),
                };
                list.into_iter()
                    .map(|seed| random_kernel(seed, *cout, *cin, *s, KernelDist::default()))
                    .collect()
            }
        }
    }

    pub fn label(&self, kernel: &Kernel) -> String {
        match self {
            Self::File(path) => path.display().to_string(),
            Self::Random { .. } => kernel.shape_label(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_random_specs() {
        assert_eq!(
            "random:3:2x4x5".parse::<KernelSource>().unwrap(),
            KernelSource::Random {
                seeds: Seeds::One(3),
                cout: 2,
                cin: 4,
                s: 5
            }
        );
        let each: KernelSource = "random:*:1x1x3".parse().unwrap();
        assert_eq!(each.load(4).unwrap().len(), 4);
        assert!("random:x:1x1x3".parse::<KernelSource>().is_err());
        assert!("random:1:1x3".parse::<KernelSource>().is_err());
        assert_eq!(
            "k.json".parse::<KernelSource>().unwrap(),
            KernelSource::File("k.json".into())
        );
    }
}
