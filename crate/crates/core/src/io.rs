//! JSON file formats for trajectories, corridors and scenarios. Every error
//! names the file and a JSON pointer to the offending value.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corridor::{Corridor, GeometryError, Halfspace, Polyhedron};
use crate::mpcc::MpccError;
use crate::scalar::Real;
use crate::sim::{Scenario, ScenarioError};
use crate::trajectory::{PolySegment, ReferenceTrajectory, TrajectoryError};
use crate::vec3::Vec3;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: line {line}, column {column}: {message}", path.display())]
    Syntax {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    /// Wrong shape, or a value violating an invariant.
    #[error("{}: {}: {message}", path.display(), pointer_display(pointer))]
    Schema {
        path: PathBuf,
        pointer: String,
        message: String,
    },
}

fn pointer_display(pointer: &str) -> &str {
    if pointer.is_empty() {
        "(root)"
    } else {
        pointer
    }
}

impl LoadError {
    pub fn pointer(&self) -> Option<&str> {
        match self {
            LoadError::Schema { pointer, .. } => Some(pointer),
            _ => None,
        }
    }

    fn schema(path: &Path, pointer: impl Into<String>, message: impl fmt::Display) -> Self {
        LoadError::Schema {
            path: path.to_path_buf(),
            pointer: pointer.into(),
            message: message.to_string(),
        }
    }
}

/// RFC 6901 pointer for a deserializer path.
fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { variant } => {
                out.push('/');
                out.push_str(variant);
            }
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

/// Deserializes `text`, reporting shape errors with a JSON pointer.
pub fn parse_json<D: DeserializeOwned>(text: &str, path: &Path) -> Result<D, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let result = serde_path_to_error::deserialize(de);
    result.map_err(|err| {
        let pointer = json_pointer(err.path());
        let inner = err.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => LoadError::schema(path, pointer, strip_position(&inner)),
            _ => LoadError::Syntax {
                path: path.to_path_buf(),
                line: inner.line(),
                column: inner.column(),
                message: strip_position(&inner),
            },
        }
    })
}

/// serde_json appends " at line L column C"; the pointer or the explicit
/// position fields already carry that.
fn strip_position(err: &serde_json::Error) -> String {
    let text = err.to_string();
    match text.rfind(" at line ") {
        Some(i) => text[..i].to_string(),
        None => text,
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct TrajectoryFile<T> {
    pub t0: T,
    pub segments: Vec<SegmentFile<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SegmentFile<T> {
    pub duration: T,
    pub corridor_index: usize,
    pub coeffs: AxisCoeffs<T>,
}

/// Ascending-power coefficients in segment-local time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct AxisCoeffs<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
}

impl<T: Real> TrajectoryFile<T> {
    pub fn from_trajectory(traj: &ReferenceTrajectory<T>) -> Self {
        Self {
            t0: traj.t0(),
            segments: traj
                .segments()
                .iter()
                .map(|s| SegmentFile {
                    duration: s.duration,
                    corridor_index: s.corridor_index,
                    coeffs: AxisCoeffs {
                        x: s.coeffs[0].clone(),
                        y: s.coeffs[1].clone(),
                        z: s.coeffs[2].clone(),
                    },
                })
                .collect(),
        }
    }

    fn into_segments(self) -> (T, Vec<PolySegment<T>>) {
        let segs = self
            .segments
            .into_iter()
            .map(|s| PolySegment::new(s.duration, [s.coeffs.x, s.coeffs.y, s.coeffs.z], s.corridor_index))
            .collect();
        (self.t0, segs)
    }

    /// Checks every invariant and reports the first violation.
    pub fn build(self, path: &Path) -> Result<ReferenceTrajectory<T>, LoadError> {
        let (t0, segs) = self.into_segments();
        if !t0.is_finite() {
            return Err(LoadError::schema(path, "/t0", "must be finite"));
        }
        ReferenceTrajectory::new(t0, segs).map_err(|e| trajectory_error(path, e))
    }

    /// Checks everything except joint continuity, which callers may want to
    /// list in full.
    pub fn build_without_continuity(self, path: &Path) -> Result<ReferenceTrajectory<T>, LoadError> {
        let (t0, segs) = self.into_segments();
        match ReferenceTrajectory::new(t0, segs.clone()) {
            Ok(t) => Ok(t),
            Err(TrajectoryError::Discontinuity { .. }) => Ok(ReferenceTrajectory::new_unchecked(t0, segs)),
            Err(e) => Err(trajectory_error(path, e)),
        }
    }
}

/// JSON pointer of the segment or joint a trajectory error refers to.
pub fn trajectory_pointer(err: &TrajectoryError) -> String {
    match err {
        TrajectoryError::Empty => "/segments".into(),
        TrajectoryError::NonPositiveDuration { segment, .. } => format!("/segments/{segment}/duration"),
        TrajectoryError::DegreeMismatch { segment, .. } | TrajectoryError::NonFinite { segment } => {
            format!("/segments/{segment}")
        }
        TrajectoryError::Discontinuity { joint, .. } => format!("/segments/{}", joint + 1),
        TrajectoryError::CorridorIndex { segment, .. } => format!("/segments/{segment}/corridor_index"),
        TrajectoryError::InvalidOrder(_) | TrajectoryError::InvalidWindow(_) => String::new(),
    }
}

fn trajectory_error(path: &Path, err: TrajectoryError) -> LoadError {
    LoadError::schema(path, trajectory_pointer(&err), err)
}

pub fn parse_trajectory<T: Real + DeserializeOwned>(text: &str, path: &Path) -> Result<ReferenceTrajectory<T>, LoadError> {
    parse_json::<TrajectoryFile<T>>(text, path)?.build(path)
}

pub fn load_trajectory<T: Real + DeserializeOwned>(path: &Path) -> Result<ReferenceTrajectory<T>, LoadError> {
    parse_trajectory(&read(path)?, path)
}

pub fn load_trajectory_file<T: Real + DeserializeOwned>(path: &Path) -> Result<TrajectoryFile<T>, LoadError> {
    parse_json(&read(path)?, path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct CorridorFile<T> {
    pub polyhedra: Vec<PolyhedronFile<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct PolyhedronFile<T> {
    pub faces: Vec<FaceFile<T>>,
}

/// `normal · q <= offset`; normals need not be unit length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct FaceFile<T> {
    pub normal: [T; 3],
    pub offset: T,
}

impl<T: Real> CorridorFile<T> {
    pub fn from_corridor(corridor: &Corridor<T>) -> Self {
        Self {
            polyhedra: corridor
                .polyhedra()
                .iter()
                .map(|p| PolyhedronFile {
                    faces: p
                        .faces()
                        .iter()
                        .map(|f| FaceFile {
                            normal: [f.normal[0], f.normal[1], f.normal[2]],
                            offset: f.offset,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Builds each polyhedron with its own checks (nonzero normals,
    /// boundedness, interior) but without the pairwise overlap check.
    pub fn polyhedra(&self, path: &Path) -> Result<Vec<Polyhedron<T>>, LoadError> {
        if self.polyhedra.is_empty() {
            return Err(LoadError::schema(path, "/polyhedra", GeometryError::EmptyCorridor));
        }
        self.polyhedra
            .iter()
            .enumerate()
            .map(|(i, p)| {
                for (j, f) in p.faces.iter().enumerate() {
                    if !f.normal.iter().all(|v| v.is_finite()) || !f.offset.is_finite() {
                        return Err(LoadError::schema(
                            path,
                            format!("/polyhedra/{i}/faces/{j}"),
                            "non-finite normal or offset",
                        ));
                    }
                }
                let faces = p
                    .faces
                    .iter()
                    .map(|f| Halfspace::new(Vec3::from(f.normal), f.offset))
                    .collect();
                Polyhedron::new(faces).map_err(|e| {
                    let pointer = match e {
                        GeometryError::ZeroNormal { face } => format!("/polyhedra/{i}/faces/{face}/normal"),
                        _ => format!("/polyhedra/{i}"),
                    };
                    LoadError::schema(path, pointer, e)
                })
            })
            .collect()
    }

    pub fn build(&self, path: &Path) -> Result<Corridor<T>, LoadError> {
        Corridor::new(self.polyhedra(path)?).map_err(|e| {
            let pointer = match &e {
                GeometryError::NoOverlap { second, .. } => format!("/polyhedra/{second}"),
                _ => "/polyhedra".into(),
            };
            LoadError::schema(path, pointer, e)
        })
    }
}

pub fn parse_corridor<T: Real + DeserializeOwned>(text: &str, path: &Path) -> Result<Corridor<T>, LoadError> {
    parse_json::<CorridorFile<T>>(text, path)?.build(path)
}

pub fn load_corridor<T: Real + DeserializeOwned>(path: &Path) -> Result<Corridor<T>, LoadError> {
    parse_corridor(&read(path)?, path)
}

pub fn load_corridor_file<T: Real + DeserializeOwned>(path: &Path) -> Result<CorridorFile<T>, LoadError> {
    parse_json(&read(path)?, path)
}

/// A scenario with its referenced files loaded and cross-checked.
#[derive(Debug, Clone)]
pub struct LoadedScenario<T> {
    pub scenario: Scenario<T>,
    pub trajectory: ReferenceTrajectory<T>,
    pub corridor: Corridor<T>,
    /// Scenario file the paths were resolved against.
    pub path: PathBuf,
}

/// Loads a scenario and the trajectory and corridor it names, relative to
/// the scenario file's directory. A missing `name` defaults to the file stem.
pub fn load_scenario<T: Real + DeserializeOwned>(path: &Path) -> Result<LoadedScenario<T>, LoadError> {
    let mut scenario: Scenario<T> = parse_json(&read(path)?, path)?;
    scenario.validate().map_err(|e| scenario_error(path, e))?;
    if scenario.name.is_none() {
        scenario.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    let dir = path.parent().unwrap_or(Path::new(""));
    let trajectory = load_trajectory(&dir.join(&scenario.trajectory))?;
    let corridor = load_corridor(&dir.join(&scenario.corridor))?;
    trajectory
        .check_corridor_indices(corridor.len())
        .map_err(|e| trajectory_error(&dir.join(&scenario.trajectory), e))?;
    Ok(LoadedScenario {
        scenario,
        trajectory,
        corridor,
        path: path.to_path_buf(),
    })
}

/// Maps a scenario or controller-config error to its location in the
/// scenario file.
pub fn scenario_error(path: &Path, err: ScenarioError) -> LoadError {
    match err {
        ScenarioError::Invalid { pointer, message } => LoadError::schema(path, pointer, message),
        ScenarioError::Controller(MpccError::Config { field, reason }) => {
            LoadError::schema(path, format!("/mpcc/{}", field.replace('.', "/")), reason)
        }
        ScenarioError::Controller(e) => LoadError::schema(path, "", e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem.json")
    }

    const LINE: &str = r#"{"t0": 0, "segments": [
        {"duration": 1, "corridor_index": 0, "coeffs": {"x": [0, 1], "y": [0, 0], "z": [0, 0]}},
        {"duration": 1, "corridor_index": 0, "coeffs": {"x": [1, 1], "y": [0, 0], "z": [0, 0]}}]}"#;

    #[test]
    fn trajectory_round_trip() {
        let t: ReferenceTrajectory<f64> = parse_trajectory(LINE, p()).unwrap();
        assert_eq!(t.tm(), 2.0);
        assert_eq!(t.position(1.5), Vec3::new(1.5, 0.0, 0.0));
        let text = serde_json::to_string(&TrajectoryFile::from_trajectory(&t)).unwrap();
        assert_eq!(parse_trajectory::<f64>(&text, p()).unwrap(), t);
    }

    #[test]
    fn shape_errors_carry_pointers() {
        let bad = LINE.replace(r#""y": [0, 0], "z": [0, 0]}}]"#, r#""y": [0, "a"], "z": [0, 0]}}]"#);
        let err = parse_trajectory::<f64>(&bad, p()).unwrap_err();
        assert_eq!(err.pointer(), Some("/segments/1/coeffs/y/1"), "{err}");

        let err = parse_trajectory::<f64>(r#"{"t0": 0}"#, p()).unwrap_err();
        assert_eq!(err.pointer(), Some(""), "{err}");
        assert!(err.to_string().contains("segments"));

        let err = parse_trajectory::<f64>(r#"{"t0": 0, "segments": [], "extra": 1}"#, p()).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");

        assert!(matches!(parse_trajectory::<f64>("{", p()), Err(LoadError::Syntax { .. })));
    }

    #[test]
    fn invariant_errors_carry_pointers() {
        let jump = LINE.replace(r#""x": [1, 1]"#, r#""x": [1.5, 1]"#);
        let err = parse_trajectory::<f64>(&jump, p()).unwrap_err();
        assert_eq!(err.pointer(), Some("/segments/1"));
        assert!(err.to_string().contains("joint 0"), "{err}");

        let neg = LINE.replacen(r#""duration": 1"#, r#""duration": -1"#, 1);
        assert_eq!(parse_trajectory::<f64>(&neg, p()).unwrap_err().pointer(), Some("/segments/0/duration"));
    }

    fn cube(lo: f64, hi: f64) -> String {
        format!(
            r#"{{"faces": [{{"normal": [1,0,0], "offset": {hi}}}, {{"normal": [-1,0,0], "offset": {nlo}}},
               {{"normal": [0,1,0], "offset": 1}}, {{"normal": [0,-1,0], "offset": 1}},
               {{"normal": [0,0,1], "offset": 1}}, {{"normal": [0,0,-1], "offset": 1}}]}}"#,
            nlo = -lo
        )
    }

    #[test]
    fn corridor_errors() {
        let ok = format!(r#"{{"polyhedra": [{}, {}]}}"#, cube(0.0, 2.0), cube(1.0, 3.0));
        let c: Corridor<f64> = parse_corridor(&ok, p()).unwrap();
        assert_eq!(c.len(), 2);

        let gap = format!(r#"{{"polyhedra": [{}, {}, {}]}}"#, cube(0.0, 2.0), cube(1.0, 3.0), cube(4.0, 5.0));
        let err = parse_corridor::<f64>(&gap, p()).unwrap_err();
        assert_eq!(err.pointer(), Some("/polyhedra/2"));
        assert!(err.to_string().contains("polyhedra 1 and 2"), "{err}");

        let zero = ok.replacen("[1,0,0]", "[0,0,0]", 1);
        assert_eq!(parse_corridor::<f64>(&zero, p()).unwrap_err().pointer(), Some("/polyhedra/0/faces/0/normal"));

        let open = r#"{"polyhedra": [{"faces": [{"normal": [1,0,0], "offset": 1}, {"normal": [0,1,0], "offset": 1},
            {"normal": [0,0,1], "offset": 1}, {"normal": [-1,-1,-1], "offset": 1}, {"normal": [1,1,0], "offset": 5}]}]}"#;
        assert!(parse_corridor::<f64>(open, p()).is_ok());
        let unbounded = r#"{"polyhedra": [{"faces": [{"normal": [1,0,0], "offset": 1}, {"normal": [-1,0,0], "offset": 1},
            {"normal": [0,1,0], "offset": 1}, {"normal": [0,-1,0], "offset": 1}]}]}"#;
        let err = parse_corridor::<f64>(unbounded, p()).unwrap_err();
        assert_eq!(err.pointer(), Some("/polyhedra/0"));
    }

    #[test]
    fn scenario_config_errors_point_into_mpcc() {
        let err = scenario_error(
            p(),
            ScenarioError::Controller(MpccError::Config {
                field: "limits.v_max".into(),
                reason: "must be positive and finite",
            }),
        );
        assert_eq!(err.pointer(), Some("/mpcc/limits/v_max"));
    }
}
