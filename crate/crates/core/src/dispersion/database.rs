//! Plain-text crystal database.
//!
//! ```text
//! format-version = 1
//! crystal = KDP
//! form = two-pole
//! ordinary = 2.259276 0.01008956 0.012942625 13.00522 400
//! extraordinary = 2.132668 0.008637494 0.012281043 3.2279924 400
//! valid-range-nm = 214 1529
//! optic-axis-cut-deg = 85
//! ```
//!
//! `#` starts a comment line. Every key inside a block is required exactly once.

use std::fmt::Write as _;
use std::path::Path;

use super::{CrystalDispersion, DispersionError, SellmeierFit, SellmeierForm, WavelengthRange};

pub const FORMAT_VERSION: u32 = 1;

/// The database shipped with the crate.
pub const DEFAULT_DATABASE: &str = include_str!("../../data/crystals.txt");

/// Where the shipped database lives in the source tree.
pub const DEFAULT_DATABASE_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/crystals.txt");

const KEYS: [&str; 5] = [
    "form",
    "ordinary",
    "extraordinary",
    "valid-range-nm",
    "optic-axis-cut-deg",
];

#[derive(Default)]
struct Block {
    name: String,
    line: usize,
    values: [Option<(usize, String)>; 5],
}

fn parse_err(line: usize, reason: impl Into<String>) -> DispersionError {
    DispersionError::ParseError {
        line,
        reason: reason.into(),
    }
}

fn parse_numbers(line: usize, key: &str, value: &str) -> Result<Vec<f64>, DispersionError> {
    value
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| parse_err(line, format!("`{key}`: `{tok}` is not a number")))
        })
        .collect()
}

impl Block {
    fn finish(self) -> Result<CrystalDispersion, DispersionError> {
        let Block { name, line, values } = self;
        let mut fields = Vec::with_capacity(KEYS.len());
        for (key, v) in KEYS.iter().zip(values) {
            fields.push(v.ok_or_else(|| {
                parse_err(line, format!("crystal `{name}` is missing `{key}`"))
            })?);
        }
        let mut it = fields.into_iter();
        let (form_line, form) = it.next().unwrap();
        let (o_line, ordinary) = it.next().unwrap();
        let (e_line, extraordinary) = it.next().unwrap();
        let (r_line, range) = it.next().unwrap();
        let (c_line, cut) = it.next().unwrap();

        let form: SellmeierForm = form.parse().map_err(|e: String| parse_err(form_line, e))?;
        let range = parse_numbers(r_line, "valid-range-nm", &range)?;
        let &[min_nm, max_nm] = range.as_slice() else {
            return Err(parse_err(r_line, "`valid-range-nm` needs exactly two values"));
        };
        let range = WavelengthRange::new(min_nm, max_nm);
        let cut = parse_numbers(c_line, "optic-axis-cut-deg", &cut)?;
        let &[cut] = cut.as_slice() else {
            return Err(parse_err(c_line, "`optic-axis-cut-deg` needs exactly one value"));
        };
        let fit = |l: usize, key: &str, value: &str| {
            SellmeierFit::new(form, parse_numbers(l, key, value)?, range)
                .map_err(|e| parse_err(l, format!("`{key}`: {e}")))
        };
        let ordinary = fit(o_line, "ordinary", &ordinary)?;
        let extraordinary = fit(e_line, "extraordinary", &extraordinary)?;
        Ok(CrystalDispersion::new_unchecked(
            name,
            ordinary,
            extraordinary,
            cut,
        ))
    }
}

/// Parses database text without checking the physical invariants.
pub fn parse_crystal_database_unchecked(
    text: &str,
) -> Result<Vec<CrystalDispersion>, DispersionError> {
    let mut crystals = Vec::new();
    let mut current: Option<Block> = None;
    let mut saw_version = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{trimmed}`")))?;

        if !saw_version {
            if key != "format-version" {
                return Err(parse_err(line, "first entry must be `format-version`"));
            }
            match value.parse::<u32>() {
                Ok(FORMAT_VERSION) => {}
                _ => {
                    return Err(parse_err(
                        line,
                        format!("unsupported format-version `{value}` (expected {FORMAT_VERSION})"),
                    ))
                }
            }
            saw_version = true;
            continue;
        }

        if key == "crystal" {
            if value.is_empty() {
                return Err(parse_err(line, "empty crystal name"));
            }
            if crystals
                .iter()
                .any(|c: &CrystalDispersion| c.name() == value)
                || current.as_ref().is_some_and(|b| b.name == value)
            {
                return Err(parse_err(line, format!("duplicate crystal `{value}`")));
            }
            if let Some(block) = current.take() {
                crystals.push(block.finish()?);
            }
            current = Some(Block {
                name: value.to_string(),
                line,
                ..Block::default()
            });
            continue;
        }

        let block = current
            .as_mut()
            .ok_or_else(|| parse_err(line, format!("`{key}` outside a crystal block")))?;
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| parse_err(line, format!("unknown key `{key}`")))?;
        if block.values[slot].is_some() {
            return Err(parse_err(line, format!("duplicate key `{key}`")));
        }
        block.values[slot] = Some((line, value.to_string()));
    }

    if let Some(block) = current.take() {
        crystals.push(block.finish()?);
    }
    Ok(crystals)
}

/// Parses database text and rejects entries that violate a crystal invariant.
pub fn parse_crystal_database(text: &str) -> Result<Vec<CrystalDispersion>, DispersionError> {
    let crystals = parse_crystal_database_unchecked(text)?;
    for c in &crystals {
        c.validate()?;
    }
    Ok(crystals)
}

pub fn load_crystal_database(
    path: impl AsRef<Path>,
) -> Result<Vec<CrystalDispersion>, DispersionError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        parse_err(0, format!("cannot read {}: {e}", path.display()))
    })?;
    parse_crystal_database(&text)
}

/// Writes crystals in the database format. Floats use the shortest
/// representation that parses back to the same bits.
pub fn to_database_string(crystals: &[CrystalDispersion]) -> String {
    let join = |xs: &[f64]| {
        xs.iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = format!("format-version = {FORMAT_VERSION}\n");
    for c in crystals {
        // ranges of both fits are identical when loaded from this format
        let r = c.ordinary().valid_range();
        let _ = write!(
            out,
            "\ncrystal = {}\nform = {}\nordinary = {}\nextraordinary = {}\nvalid-range-nm = {:?} {:?}\noptic-axis-cut-deg = {:?}\n",
            c.name(),
            c.ordinary().form(),
            join(c.ordinary().coefficients()),
            join(c.extraordinary().coefficients()),
            r.min_nm,
            r.max_nm,
            c.optic_axis_cut_deg(),
        );
    }
    out
}
