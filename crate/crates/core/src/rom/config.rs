use serde::{Deserialize, Serialize};

use crate::diff::Activation;
use crate::error::{Error, Result};
use crate::heat_source::PARAM_COUNT;

pub const QOI_COUNT: usize = 2;
pub const QOI_LABELS: [&str; QOI_COUNT] = ["v_bead", "t_mp"];
/// Five repeated process inputs plus the time coordinate.
pub const FNO_INPUT_CHANNELS: usize = PARAM_COUNT + 1;

/// Uniform initialisation scaled by fan-in (first dimension).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    Zero,
    /// Feeds a rectifier: `U(-sqrt(6/fan_in), +)`.
    Rectified,
    /// Linear output with variance `gain / fan_in`.
    Linear(f64),
    /// Real or imaginary part of complex mode weights, variance `1 / (2 fan_in)`.
    Spectral,
}

impl Init {
    pub fn limit(self, fan_in: usize) -> f64 {
        let f = fan_in as f64;
        match self {
            Init::Zero => 0.0,
            Init::Rectified => (6.0 / f).sqrt(),
            Init::Linear(gain) => (3.0 * gain / f).sqrt(),
            Init::Spectral => (1.5 / f).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RomKind {
    Dnn,
    DeepOnet,
    Fno,
}

impl RomKind {
    pub const ALL: [RomKind; 3] = [RomKind::Dnn, RomKind::DeepOnet, RomKind::Fno];

    pub fn label(self) -> &'static str {
        match self {
            RomKind::Dnn => "dnn",
            RomKind::DeepOnet => "deeponet",
            RomKind::Fno => "fno",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dnn" => Ok(RomKind::Dnn),
            "deeponet" => Ok(RomKind::DeepOnet),
            "fno" => Ok(RomKind::Fno),
            other => Err(Error::invalid(format!("unknown model kind {other:?} (dnn|deeponet|fno)"))),
        }
    }
}

/// What a model is trained to predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// Per-run maxima of both QoIs.
    Scalar,
    /// Both QoIs at every output step.
    Series,
}

impl Target {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(Target::Scalar),
            "series" => Ok(Target::Series),
            other => Err(Error::invalid(format!("unknown target {other:?} (scalar|series)"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Target::Scalar => "scalar",
            Target::Series => "series",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnnConfig {
    /// Hidden layer widths.
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
}

/// One branch/trunk pair per QoI. Both width lists end with the latent size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepOnetConfig {
    pub branch_widths: Vec<usize>,
    pub trunk_widths: Vec<usize>,
    pub latent_dim: usize,
    pub activation: Activation,
}

impl DeepOnetConfig {
    /// `hidden` layers of `neurons` in the branch and `trunk_hidden` in the
    /// trunk, each followed by a latent layer of the same width.
    pub fn uniform(neurons: usize, hidden: usize, trunk_hidden: usize) -> Self {
        Self {
            branch_widths: vec![neurons; hidden + 1],
            trunk_widths: vec![neurons; trunk_hidden + 1],
            latent_dim: neurons,
            activation: Activation::Relu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnoConfig {
    pub modes: usize,
    pub width: usize,
    pub n_layers: usize,
    pub grid_len: usize,
    pub projection_width: usize,
    pub activation: Activation,
}

impl FnoConfig {
    pub fn new(modes: usize, n_layers: usize) -> Self {
        Self {
            modes,
            width: 16,
            n_layers,
            grid_len: 200,
            projection_width: 32,
            activation: Activation::Gelu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RomConfig {
    Dnn(DnnConfig),
    #[serde(rename = "deeponet")]
    DeepOnet(DeepOnetConfig),
    Fno(FnoConfig),
}

fn check_widths(what: &str, widths: &[usize]) -> Result<()> {
    if widths.is_empty() || widths.contains(&0) {
        return Err(Error::invalid(format!("{what} needs >= 1 layer of width >= 1, got {widths:?}")));
    }
    Ok(())
}

impl RomConfig {
    pub fn kind(&self) -> RomKind {
        match self {
            RomConfig::Dnn(_) => RomKind::Dnn,
            RomConfig::DeepOnet(_) => RomKind::DeepOnet,
            RomConfig::Fno(_) => RomKind::Fno,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RomConfig::Dnn(c) => check_widths("dnn", &c.layer_widths),
            RomConfig::DeepOnet(c) => {
                check_widths("deeponet branch", &c.branch_widths)?;
                check_widths("deeponet trunk", &c.trunk_widths)?;
                let (b, t) = (c.branch_widths.last(), c.trunk_widths.last());
                if b != Some(&c.latent_dim) || t != Some(&c.latent_dim) {
                    return Err(Error::invalid(format!(
                        "branch and trunk must end at latent width {}, got {b:?}/{t:?}",
                        c.latent_dim
                    )));
                }
                Ok(())
            }
            RomConfig::Fno(c) => {
                if c.n_layers == 0 || c.width == 0 || c.projection_width == 0 {
                    return Err(Error::invalid("fno needs n_layers, width and projection_width >= 1"));
                }
                if c.modes == 0 || c.modes > c.grid_len / 2 {
                    return Err(Error::invalid(format!(
                        "fno modes must lie in 1..={}, got {}",
                        c.grid_len / 2,
                        c.modes
                    )));
                }
                Ok(())
            }
        }
    }

    /// Trainable tensors in storage order, with their initialisation rule.
    pub fn layout(&self) -> Vec<(Vec<usize>, Init)> {
        // `dims` are layer sizes; hidden layers feed an activation, the last does not.
        fn dense(dims: &[usize], last: Init, out: &mut Vec<(Vec<usize>, Init)>) {
            let n = dims.len() - 1;
            for (l, w) in dims.windows(2).enumerate() {
                let rule = if l + 1 == n { last } else { Init::Rectified };
                out.push((vec![w[0], w[1]], rule));
                out.push((vec![w[1]], Init::Zero));
            }
        }
        let mut layout = Vec::new();
        match self {
            RomConfig::Dnn(c) => {
                let mut dims = vec![PARAM_COUNT];
                dims.extend(&c.layer_widths);
                dims.push(QOI_COUNT);
                dense(&dims, Init::Linear(1.0), &mut layout);
            }
            RomConfig::DeepOnet(c) => {
                for _ in 0..QOI_COUNT {
                    let mut branch = vec![PARAM_COUNT];
                    branch.extend(&c.branch_widths);
                    dense(&branch, Init::Linear(1.0), &mut layout);
                    let mut trunk = vec![1];
                    trunk.extend(&c.trunk_widths);
                    // keeps the p-term dot product at unit scale
                    dense(&trunk, Init::Linear(1.0 / c.latent_dim as f64), &mut layout);
                    layout.push((vec![1], Init::Zero));
                }
            }
            RomConfig::Fno(c) => {
                dense(&[FNO_INPUT_CHANNELS, c.width], Init::Linear(1.0), &mut layout);
                for _ in 0..c.n_layers {
                    layout.push((vec![c.width, c.width, c.modes], Init::Spectral));
                    layout.push((vec![c.width, c.width, c.modes], Init::Spectral));
                    dense(&[c.width, c.width], Init::Rectified, &mut layout);
                }
                dense(&[c.width, c.projection_width, QOI_COUNT], Init::Linear(1.0), &mut layout);
            }
        }
        layout
    }

    pub fn param_shapes(&self) -> Vec<Vec<usize>> {
        self.layout().into_iter().map(|(s, _)| s).collect()
    }

    pub fn param_count(&self) -> usize {
        self.param_shapes().iter().map(|s| s.iter().product::<usize>()).sum()
    }

    /// Architecture used when none is configured: the first study group for
    /// the DNN and the time-series settings for the operator models.
    pub fn default_for(kind: RomKind) -> Self {
        match kind {
            RomKind::Dnn => RomConfig::Dnn(DnnConfig {
                layer_widths: vec![100, 150, 200, 150, 100],
                activation: Activation::Relu,
            }),
            RomKind::DeepOnet => RomConfig::DeepOnet(DeepOnetConfig::uniform(130, 3, 3)),
            RomKind::Fno => RomConfig::Fno(FnoConfig::new(50, 4)),
        }
    }

    /// Whether the architecture natively produces a time series.
    pub fn is_operator(&self) -> bool {
        !matches!(self, RomConfig::Dnn(_))
    }
}

/// The six hyperparameter groups of the architecture study, `group` in 1..=6.
pub fn study_group(kind: RomKind, group: usize) -> Result<RomConfig> {
    if !(1..=6).contains(&group) {
        return Err(Error::invalid(format!("study groups are 1..=6, got {group}")));
    }
    let g = group - 1;
    Ok(match kind {
        RomKind::Dnn => {
            let widths: [&[usize]; 6] = [
                &[100, 150, 200, 150, 100],
                &[150, 200, 250, 200, 150],
                &[250, 300, 350, 300, 250],
                &[300, 300],
                &[300, 300, 300],
                &[300, 300, 300, 300],
            ];
            RomConfig::Dnn(DnnConfig {
                layer_widths: widths[g].to_vec(),
                activation: Activation::Relu,
            })
        }
        RomKind::DeepOnet => {
            let (neurons, branch, trunk) = [(100, 2, 1), (200, 2, 1), (300, 2, 1), (150, 3, 2), (150, 4, 3), (150, 5, 4)][g];
            RomConfig::DeepOnet(DeepOnetConfig::uniform(neurons, branch, trunk))
        }
        RomKind::Fno => {
            let (modes, layers) = [(1, 4), (5, 4), (9, 4), (1, 1), (1, 2), (1, 3)][g];
            RomConfig::Fno(FnoConfig::new(modes, layers))
        }
    })
}
