//! Chip exchange directory and the external-command separator.
//!
//! Inputs are `<id>.input.c0` (mask8), `<id>.input.c1` (mask8 skeleton) and
//! `<id>.input.c2` (float distance); a separator answers with `<id>.pred.cls`
//! (class8) and `<id>.pred.skel` (float). All files use the raster formats of
//! [`crate::raster::io`], sidecars included.

use super::{check_output, Chip, Separator, SeparatorInput, SeparatorOutput};
use crate::error::{Error, Result};
use crate::raster::{read_raster, write_raster, Band, RasterGrid};
use std::path::{Path, PathBuf};
use std::process::Command;

const INPUT_MARK: &str = ".input.c0";

fn file(dir: &Path, id: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{id}.{suffix}"))
}

pub fn write_chip_input(dir: &Path, id: &str, input: &SeparatorInput) -> Result<()> {
    write_raster(&input.mask, file(dir, id, "input.c0"))?;
    write_raster(&input.skeleton, file(dir, id, "input.c1"))?;
    write_raster(&input.distance, file(dir, id, "input.c2"))
}

fn expect_band(grid: RasterGrid, band: Band, path: &Path) -> Result<RasterGrid> {
    if grid.band() == band {
        Ok(grid)
    } else {
        Err(Error::Header {
            path: path.to_path_buf(),
            reason: format!("expected band {band:?}, found {:?}", grid.band()),
        })
    }
}

fn read_band(path: PathBuf, band: Band) -> Result<RasterGrid> {
    let grid = read_raster(&path)?;
    expect_band(grid, band, &path)
}

pub fn read_chip_input(dir: &Path, id: &str) -> Result<SeparatorInput> {
    Ok(SeparatorInput {
        mask: read_band(file(dir, id, "input.c0"), Band::Mask8)?,
        skeleton: read_band(file(dir, id, "input.c1"), Band::Mask8)?,
        distance: read_band(file(dir, id, "input.c2"), Band::IndexF32)?,
    })
}

pub fn write_chip_output(dir: &Path, id: &str, out: &SeparatorOutput) -> Result<()> {
    write_raster(&out.class_mask, file(dir, id, "pred.cls"))?;
    write_raster(&out.skeleton_prob, file(dir, id, "pred.skel"))
}

pub fn read_chip_output(dir: &Path, id: &str) -> Result<SeparatorOutput> {
    Ok(SeparatorOutput {
        class_mask: read_band(file(dir, id, "pred.cls"), Band::Class8)?,
        skeleton_prob: read_band(file(dir, id, "pred.skel"), Band::IndexF32)?,
    })
}

/// Chip ids with an input in `dir`, sorted.
pub fn list_chips(dir: &Path) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let name = entry.map_err(|e| Error::io(dir, e))?.file_name();
        if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(INPUT_MARK)) {
            ids.push(id.to_string());
        }
    }
    ids.sort();
    Ok(ids)
}

/// Answers every chip in `dir` with `separator`. Returns the chip count.
pub fn serve_chip_dir(dir: &Path, separator: &dyn Separator) -> Result<usize> {
    let ids = list_chips(dir)?;
    for id in &ids {
        let chip = Chip {
            id: id.clone(),
            input: read_chip_input(dir, id)?,
        };
        let out = separator.separate(&chip)?;
        write_chip_output(dir, id, &out)?;
    }
    Ok(ids.len())
}

/// Runs `program args... <chip_dir>` once per batch and reads back the
/// predictions. The process must exit with status 0 and answer every chip.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSeparator {
    pub program: String,
    pub args: Vec<String>,
}

impl ExternalSeparator {
    /// Parses a shell-style command line.
    pub fn parse(command: &str) -> Result<Self> {
        let mut words = shlex::split(command)
            .filter(|w| !w.is_empty())
            .ok_or_else(|| Error::InvalidParameter(format!("cannot parse separator command {command:?}")))?
            .into_iter();
        let program = words
            .next()
            .ok_or_else(|| Error::InvalidParameter("empty separator command".into()))?;
        Ok(Self {
            program,
            args: words.collect(),
        })
    }
}

impl Separator for ExternalSeparator {
    fn name(&self) -> String {
        format!("external({})", self.program)
    }

    fn separate_batch(&self, chips: &[Chip]) -> Result<Vec<SeparatorOutput>> {
        let Some(first) = chips.first() else {
            return Ok(Vec::new());
        };
        let fail = |chip: &str, reason: String| Error::Separator {
            chip: chip.to_string(),
            reason,
        };
        let dir = tempfile::Builder::new()
            .prefix("woodyline-chips-")
            .tempdir()
            .map_err(|e| fail(&first.id, format!("cannot create chip directory: {e}")))?;
        for c in chips {
            write_chip_input(dir.path(), &c.id, &c.input)?;
        }
        let status = Command::new(&self.program)
            .args(&self.args)
            .arg(dir.path())
            .status()
            .map_err(|e| fail(&first.id, format!("cannot start {}: {e}", self.program)))?;
        if !status.success() {
            let ids: Vec<&str> = chips.iter().map(|c| c.id.as_str()).collect();
            return Err(fail(&ids.join(","), format!("{} exited with {status}", self.program)));
        }
        chips
            .iter()
            .map(|c| {
                let out = read_chip_output(dir.path(), &c.id)
                    .map_err(|e| fail(&c.id, format!("unreadable prediction: {e}")))?;
                check_output(c, &out)?;
                Ok(out)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GeoRef;
    use crate::separator::{prepare_input, BaselineSeparator};

    fn chip(id: &str) -> Chip {
        let px: Vec<u8> = (0..64 * 16).map(|i| u8::from((6..10).contains(&(i / 64)))).collect();
        let m = RasterGrid::mask(64, 16, GeoRef::pixel_space(16), px).unwrap();
        Chip {
            id: id.into(),
            input: prepare_input(&m).unwrap(),
        }
    }

    #[test]
    fn chip_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = chip("r0_c0");
        write_chip_input(dir.path(), &c.id, &c.input).unwrap();
        assert_eq!(read_chip_input(dir.path(), &c.id).unwrap(), c.input);
        assert_eq!(list_chips(dir.path()).unwrap(), vec!["r0_c0".to_string()]);
        let n = serve_chip_dir(dir.path(), &BaselineSeparator::default()).unwrap();
        assert_eq!(n, 1);
        let out = read_chip_output(dir.path(), &c.id).unwrap();
        assert_eq!(out, BaselineSeparator::default().separate(&c).unwrap());
    }

    #[test]
    fn parse_command() {
        let e = ExternalSeparator::parse("python3 'my model.py' --gpu").unwrap();
        assert_eq!(e.program, "python3");
        assert_eq!(e.args, vec!["my model.py", "--gpu"]);
        assert!(ExternalSeparator::parse("   ").is_err());
    }

    #[test]
    fn failing_command_names_the_chip() {
        let e = ExternalSeparator::parse("false").unwrap();
        match e.separate_batch(&[chip("r5_c9")]) {
            Err(Error::Separator { chip, .. }) => assert_eq!(chip, "r5_c9"),
            other => panic!("expected a separator error, got {other:?}"),
        }
    }

    #[test]
    fn silent_command_is_a_contract_violation() {
        // exits 0 but writes nothing
        let e = ExternalSeparator::parse("true").unwrap();
        match e.separate_batch(&[chip("r1_c1")]) {
            Err(Error::Separator { chip, reason }) => {
                assert_eq!(chip, "r1_c1");
                assert!(reason.contains("prediction"));
            }
            other => panic!("expected a separator error, got {other:?}"),
        }
    }
}
