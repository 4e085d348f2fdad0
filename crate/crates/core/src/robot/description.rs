//! JSON robot description:
//!
//! ```json
//! {
//!   "name": "desk-arm",
//!   "joints": [{"axis": [0, 0, 1], "origin": {"rpy": [0, 0, 0], "xyz": [0, 0, 0.2]}}],
//!   "links": [{"name": "base", "mesh_path": "base.obj"}, {"name": "turret", "mesh_path": "turret.obj"}],
//!   "collision_mask": [[0, 2]]
//! }
//! ```
//!
//! Mesh paths resolve relative to the description file.

use std::path::{Path, PathBuf};

use nalgebra::{Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use super::{Joint, Link, RobotModel};
use crate::error::{Error, Result};
use crate::geometry::io::{load_mesh, to_obj_string};
use crate::geometry::Pose;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotDescription {
    pub name: String,
    pub joints: Vec<JointDescription>,
    pub links: Vec<LinkDescription>,
    pub collision_mask: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDescription {
    pub axis: [f64; 3],
    pub origin: OriginDescription,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginDescription {
    #[serde(default)]
    pub rpy: [f64; 3],
    #[serde(default)]
    pub xyz: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDescription {
    pub name: String,
    pub mesh_path: PathBuf,
}

/// Parses and structurally checks a description without touching meshes.
pub fn parse_description(text: &str) -> Result<RobotDescription> {
    let desc: RobotDescription =
        serde_json::from_str(text).map_err(|e| Error::format(format!("robot description: {e}")))?;
    if desc.links.len() != desc.joints.len() + 1 {
        return Err(Error::InvalidModel(format!(
            "{} joints need {} links, found {}",
            desc.joints.len(),
            desc.joints.len() + 1,
            desc.links.len()
        )));
    }
    for (i, j) in desc.joints.iter().enumerate() {
        let finite = j
            .axis
            .iter()
            .chain(&j.origin.rpy)
            .chain(&j.origin.xyz)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidModel(format!("joint {i} has non-finite values")));
        }
        let norm = Vector3::from(j.axis).norm();
        if (norm - 1.0).abs() > super::AXIS_NORM_TOL {
            return Err(Error::InvalidModel(format!(
                "joint {i} axis has norm {norm}, expected 1"
            )));
        }
    }
    Ok(desc)
}

impl RobotDescription {
    /// Loads the meshes (relative to `base_dir`) and builds the model.
    pub fn build(&self, base_dir: &Path) -> Result<RobotModel> {
        let joints = self
            .joints
            .iter()
            .enumerate()
            .map(|(i, j)| Joint {
                parent_link: i,
                axis: Unit::new_unchecked(Vector3::from(j.axis)),
                origin: Pose::from_rpy_xyz(j.origin.rpy, j.origin.xyz),
            })
            .collect();
        let links = self
            .links
            .iter()
            .map(|l| Link::new(l.name.clone(), load_mesh(&base_dir.join(&l.mesh_path))?))
            .collect::<Result<Vec<_>>>()?;
        let mask = self.collision_mask.iter().map(|p| (p[0], p[1])).collect();
        RobotModel::new(self.name.clone(), joints, links, mask)
    }
}

pub fn load_robot(path: &Path) -> Result<RobotModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let desc = parse_description(&text)?;
    desc.build(path.parent().unwrap_or(Path::new(".")))
}

/// Writes `<dir>/<name>.json` plus one OBJ per link; returns the JSON path.
pub fn save_robot(model: &RobotModel, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut links = Vec::with_capacity(model.links().len());
    for link in model.links() {
        let file = PathBuf::from(format!("{}.obj", link.name));
        let path = dir.join(&file);
        std::fs::write(&path, to_obj_string(&link.mesh)).map_err(|e| Error::io(&path, e))?;
        links.push(LinkDescription {
            name: link.name.clone(),
            mesh_path: file,
        });
    }
    let joints = model
        .joints()
        .iter()
        .map(|j| {
            let (r, p, y) = Rotation3::from_matrix_unchecked(j.origin.rotation).euler_angles();
            JointDescription {
                axis: [j.axis.x, j.axis.y, j.axis.z],
                origin: OriginDescription {
                    rpy: [r, p, y],
                    xyz: j.origin.translation.into(),
                },
            }
        })
        .collect();
    let desc = RobotDescription {
        name: model.name().to_string(),
        joints,
        links,
        collision_mask: model.collision_mask().iter().map(|&(a, b)| [a, b]).collect(),
    };
    let path = dir.join(format!("{}.json", model.name()));
    let json = serde_json::to_string_pretty(&desc).expect("description serializes");
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
