//! Run configuration: a single JSON document with every rational written as
//! a `"p/q"` string, so nothing passes through floats on the way in.

use std::path::Path;

use num_traits::Signed;
use serde::Deserialize;

use opdam_core::rat::parse_q;
use opdam_core::rootsys::{Multiplicity, Point, RootSystem, Weight, DEFAULT_DOWNSET_LIMIT};

fn default_order() -> usize {
    30
}

fn default_format() -> String {
    "json".into()
}

fn default_downset_limit() -> usize {
    DEFAULT_DOWNSET_LIMIT
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Root-system code, e.g. "A1", "B2".
    pub system: String,
    /// Multiplicity per root-length orbit, shortest first, as "p/q" strings.
    #[serde(default)]
    pub k: Vec<String>,
    /// Weight in fundamental-weight coordinates.
    #[serde(default)]
    pub lambda: Vec<i64>,
    /// Kernel truncation order.
    #[serde(rename = "N", default = "default_order")]
    pub order: usize,
    /// Lattice scales for limit experiments; strictly increasing.
    #[serde(default)]
    pub n_list: Vec<i64>,
    /// Evaluation points in simple-root coordinates, as "p/q" strings.
    #[serde(default)]
    pub z_grid: Vec<Vec<String>>,
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_downset_limit")]
    pub downset_limit: usize,
    /// Directory for the content-addressed result cache.
    #[serde(default)]
    pub cache_dir: Option<String>,
    /// Moment orders for the limit command (defaults to 1 and 2).
    #[serde(default)]
    pub moments: Vec<usize>,
    /// Systems covered by the verify command (defaults to A1, A2, B2).
    #[serde(default)]
    pub verify_systems: Vec<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {}", path.display(), e))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| format!("cannot parse config {}: {}", path.display(), e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        for s in &self.k {
            let q = parse_q(s).map_err(|e| format!("multiplicity {:?}: {}", s, e))?;
            if q.is_negative() {
                return Err(format!("multiplicity {} is negative", s));
            }
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err("n-list must be strictly increasing".into());
        }
        if self.n_list.iter().any(|&n| n < 1) {
            return Err("n-list entries must be positive".into());
        }
        if self.format != "json" && self.format != "csv" {
            return Err(format!("unknown format {:?} (expected json or csv)", self.format));
        }
        for z in &self.z_grid {
            for c in z {
                parse_q(c).map_err(|e| format!("grid coordinate {:?}: {}", c, e))?;
            }
        }
        Ok(())
    }

    pub fn root_system(&self) -> Result<RootSystem, String> {
        RootSystem::from_code(&self.system).map_err(|e| e.to_string())
    }

    pub fn multiplicity(&self, rs: &RootSystem) -> Result<Multiplicity, String> {
        let parsed: Vec<_> = self
            .k
            .iter()
            .map(|s| parse_q(s).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        match parsed {
            ref v if v.is_empty() => Err("config is missing multiplicity values".into()),
            ref v if v.len() == 1 => {
                Multiplicity::uniform(rs, v[0].clone()).map_err(|e| e.to_string())
            }
            v => Multiplicity::per_orbit(rs, v).map_err(|e| e.to_string()),
        }
    }

    pub fn weight(&self, rs: &RootSystem) -> Result<Weight, String> {
        if self.lambda.len() != rs.rank {
            return Err(format!(
                "lambda has {} coordinates, {} has rank {}",
                self.lambda.len(),
                rs.code(),
                rs.rank
            ));
        }
        Ok(Weight(self.lambda.clone()))
    }

    pub fn zgrid(&self, rs: &RootSystem) -> Result<Vec<Point>, String> {
        self.z_grid
            .iter()
            .map(|z| {
                if z.len() != rs.rank {
                    return Err(format!(
                        "grid point has {} coordinates, {} has rank {}",
                        z.len(),
                        rs.code(),
                        rs.rank
                    ));
                }
                let coords = z
                    .iter()
                    .map(|c| parse_q(c).map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Point(coords))
            })
            .collect()
    }

    pub fn moment_orders(&self) -> Vec<usize> {
        if self.moments.is_empty() {
            vec![1, 2]
        } else {
            self.moments.clone()
        }
    }

    pub fn scales(&self) -> Vec<i64> {
        if self.n_list.is_empty() {
            vec![4, 8, 16, 32, 64]
        } else {
            self.n_list.clone()
        }
    }
}
