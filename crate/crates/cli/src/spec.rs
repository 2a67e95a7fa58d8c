//! Parsing of state, class, measure and direction arguments.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use entbound::states::{self, ChessboardParams, HorodeckiParam, NoiseParam};
use entbound::{DensityMatrix, MeasureKind, PartitionClass, StepDirection};

use crate::error::CliError;
use crate::statefile::parse_state_file;

/// A state named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Ghz(usize),
    W(usize),
    Horodecki(f64),
    Chessboard([f64; 6]),
    File(PathBuf),
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| input(format!("{what}: `{s}` is not a number")))
}

impl FromStr for StateSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let Some((family, arg)) = s.split_once(':') else {
            return Ok(StateSpec::File(PathBuf::from(s)));
        };
        match family {
            "ghz" | "w" => {
                let n = arg.trim().parse::<usize>().map_err(|_| {
                    input(format!("{family}: party count `{arg}` is not an integer"))
                })?;
                Ok(if family == "ghz" {
                    StateSpec::Ghz(n)
                } else {
                    StateSpec::W(n)
                })
            }
            "horodecki" => Ok(StateSpec::Horodecki(parse_f64(arg, "horodecki")?)),
            "chessboard" => {
                let values = arg
                    .split(',')
                    .map(|v| parse_f64(v, "chessboard"))
                    .collect::<Result<Vec<_>, _>>()?;
                let params: [f64; 6] = values
                    .try_into()
                    .map_err(|_| input("chessboard needs six parameters a,b,c,d,m,n"))?;
                Ok(StateSpec::Chessboard(params))
            }
            "file" => Ok(StateSpec::File(PathBuf::from(arg))),
            _ => Err(input(format!("unknown state family `{family}`"))),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Ghz(n) => write!(f, "ghz:{n}"),
            StateSpec::W(n) => write!(f, "w:{n}"),
            StateSpec::Horodecki(a) => write!(f, "horodecki:{a}"),
            StateSpec::Chessboard(p) => {
                let parts: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                write!(f, "chessboard:{}", parts.join(","))
            }
            StateSpec::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

impl StateSpec {
    pub fn build(&self) -> Result<DensityMatrix, CliError> {
        let bad = |e: entbound::Error| input(format!("{self}: {e}"));
        match self {
            StateSpec::Ghz(n) => states::ghz(*n).map_err(bad),
            StateSpec::W(n) => states::w_state(*n).map_err(bad),
            StateSpec::Horodecki(a) => {
                states::horodecki(HorodeckiParam::new(*a).map_err(bad)?).map_err(bad)
            }
            StateSpec::Chessboard([a, b, c, d, m, n]) => {
                let p = ChessboardParams::from_real(*a, *b, *c, *d, *m, *n).map_err(bad)?;
                states::chessboard(&p).map_err(bad)
            }
            StateSpec::File(path) => parse_state_file(path),
        }
    }

    /// The state with white noise of visibility `p` mixed in, if given.
    pub fn build_noisy(&self, noise_p: Option<f64>) -> Result<DensityMatrix, CliError> {
        let rho = self.build()?;
        match noise_p {
            None => Ok(rho),
            Some(p) => {
                let p = NoiseParam::new(p).map_err(|e| input(e.to_string()))?;
                states::mix_white_noise(&rho, p).map_err(|e| input(e.to_string()))
            }
        }
    }
}

pub fn parse_measure(s: &str) -> Result<MeasureKind, CliError> {
    match s {
        "bures2" => Ok(MeasureKind::BuresSquared),
        "relent" => Ok(MeasureKind::RelativeEntropy),
        _ => Err(input(format!(
            "unknown measure `{s}` (expected bures2 or relent)"
        ))),
    }
}

/// `full`, `bisep`, or `partition:SPEC` with blocks separated by `|` and
/// one-based parties written as digits (`12|3`) or comma lists (`1,2|3`).
pub fn parse_class(s: &str) -> Result<PartitionClass, CliError> {
    match s {
        "full" => return Ok(PartitionClass::FullySeparable),
        "bisep" => return Ok(PartitionClass::BiSeparable),
        _ => {}
    }
    let Some(spec) = s.strip_prefix("partition:") else {
        return Err(input(format!(
            "unknown class `{s}` (expected full, bisep or partition:SPEC)"
        )));
    };
    let parse_party = |t: &str| -> Result<usize, CliError> {
        let p: usize = t
            .trim()
            .parse()
            .map_err(|_| input(format!("partition: `{t}` is not a party number")))?;
        p.checked_sub(1)
            .ok_or_else(|| input("partition: parties are numbered from 1"))
    };
    let blocks = spec
        .split('|')
        .map(|block| {
            if block.contains(',') {
                block
                    .split(',')
                    .map(parse_party)
                    .collect::<Result<Vec<_>, _>>()
            } else {
                block
                    .chars()
                    .map(|c| parse_party(&c.to_string()))
                    .collect::<Result<Vec<_>, _>>()
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    PartitionClass::fixed(blocks).map_err(|e| input(e.to_string()))
}

pub fn parse_direction(s: &str) -> Result<StepDirection, CliError> {
    match s {
        "hs" => Ok(StepDirection::HilbertSchmidt),
        "gradient" => Ok(StepDirection::Gradient),
        "hs-then-gradient" => Ok(StepDirection::HilbertSchmidtThenGradient),
        _ => Err(input(format!(
            "unknown direction `{s}` (expected hs, gradient or hs-then-gradient)"
        ))),
    }
}

pub fn direction_name(d: StepDirection) -> &'static str {
    match d {
        StepDirection::HilbertSchmidt => "hs",
        StepDirection::Gradient => "gradient",
        StepDirection::HilbertSchmidtThenGradient => "hs-then-gradient",
    }
}
