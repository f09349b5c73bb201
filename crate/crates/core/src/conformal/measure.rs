//! Finitely supported measures on points or cylinder words.

use std::collections::HashSet;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::export::{format_sig, parse_sig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    PsLimit,
    BrolinLyubich,
    ParryConformal,
    ProductBowen,
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Point(Complex64),
    Word(Vec<u8>),
}

impl Location {
    pub fn point(&self) -> Option<Complex64> {
        match self {
            Location::Point(z) => Some(*z),
            Location::Word(_) => None,
        }
    }

    pub fn word(&self) -> Option<&[u8]> {
        match self {
            Location::Word(w) => Some(w),
            Location::Point(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: Location,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    total_mass: f64,
    provenance: Provenance,
    /// Growth rate substituted for the true exponent, when one was used.
    beta_used: Option<f64>,
}

/// Text form of a word: digits when every symbol is below 10, otherwise
/// numbers each preceded by a dot; `-` for the empty word.
pub fn word_to_text(w: &[u8]) -> String {
    if w.is_empty() {
        "-".into()
    } else if w.iter().all(|&s| s < 10) {
        w.iter().map(|s| char::from(b'0' + s)).collect()
    } else {
        w.iter().map(|s| format!(".{s}")).collect()
    }
}

pub fn word_from_text(s: &str) -> Result<Vec<u8>> {
    let s = s.trim();
    if s == "-" {
        return Ok(vec![]);
    }
    let bad = || Error::Input(format!("malformed word {s:?}"));
    if let Some(rest) = s.strip_prefix('.') {
        rest.split('.').map(|t| t.parse::<u8>().map_err(|_| bad())).collect()
    } else {
        s.chars()
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
            .collect()
    }
}

impl AtomicMeasure {
    /// Validates weights (finite, non-negative) and that word atoms are
    /// distinct. Atoms may mix depths; same-depth words are then disjoint
    /// cylinders.
    pub fn new(atoms: Vec<Atom>, provenance: Provenance) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, a) in atoms.iter().enumerate() {
            if !(a.weight >= 0.0) || !a.weight.is_finite() {
                return input(format!("atom {i} has weight {}", a.weight));
            }
            if let Location::Word(w) = &a.location {
                if !seen.insert(w.clone()) {
                    return input(format!("cylinder {} listed twice", word_to_text(w)));
                }
            }
        }
        let total_mass = atoms.iter().map(|a| a.weight).sum();
        Ok(AtomicMeasure {
            atoms,
            total_mass,
            provenance,
            beta_used: None,
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta_used = Some(beta);
        self
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn beta_used(&self) -> Option<f64> {
        self.beta_used
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    /// Scaled to total mass 1.
    pub fn normalized(&self) -> Result<Self> {
        if !(self.total_mass > 0.0) {
            return Err(Error::Degenerate("measure has zero total mass".into()));
        }
        let mut m = self.clone();
        for a in &mut m.atoms {
            a.weight /= self.total_mass;
        }
        m.total_mass = m.atoms.iter().map(|a| a.weight).sum();
        Ok(m)
    }

    /// `integral f dmu`.
    pub fn pair<F: Fn(&Location) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|a| a.weight * f(&a.location)).sum()
    }

    /// Whether the stored total matches the sum of weights to `rel`.
    pub fn total_is_consistent(&self, rel: f64) -> bool {
        let s: f64 = self.atoms.iter().map(|a| a.weight).sum();
        (s - self.total_mass).abs() <= rel * s.abs().max(f64::MIN_POSITIVE)
    }

    /// Index of the atom at `word`, if any.
    pub fn find_word(&self, word: &[u8]) -> Option<usize> {
        self.atoms.iter().position(|a| a.location.word() == Some(word))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let points = self.atoms.iter().all(|a| a.location.point().is_some());
        if points {
            out.write_record(["location_re", "location_im", "weight"])?;
        } else {
            out.write_record(["word", "weight"])?;
        }
        for a in &self.atoms {
            match &a.location {
                Location::Point(z) => out.write_record([format_sig(z.re), format_sig(z.im), format_sig(a.weight)])?,
                Location::Word(wd) => out.write_record([word_to_text(wd), format_sig(a.weight)])?,
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, provenance: Provenance) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers: Vec<String> = rd.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let mut atoms = Vec::new();
        match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["location_re", "location_im", "weight"] => {
                for rec in rd.records() {
                    let rec = rec?;
                    if rec.len() != 3 {
                        return input(format!("expected 3 fields, got {}", rec.len()));
                    }
                    atoms.push(Atom {
                        location: Location::Point(Complex64::new(parse_sig(&rec[0])?, parse_sig(&rec[1])?)),
                        weight: parse_sig(&rec[2])?,
                    });
                }
            }
            ["word", "weight"] => {
                for rec in rd.records() {
                    let rec = rec?;
                    if rec.len() != 2 {
                        return input(format!("expected 2 fields, got {}", rec.len()));
                    }
                    atoms.push(Atom {
                        location: Location::Word(word_from_text(&rec[0])?),
                        weight: parse_sig(&rec[1])?,
                    });
                }
            }
            other => return input(format!("unrecognized measure columns {other:?}")),
        }
        AtomicMeasure::new(atoms, provenance)
    }

    pub fn to_json(&self) -> Result<String> {
        crate::export::to_rounded_json(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: AtomicMeasure = serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))?;
        let mut checked = AtomicMeasure::new(m.atoms, m.provenance)?;
        checked.beta_used = m.beta_used;
        Ok(checked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> AtomicMeasure {
        AtomicMeasure::new(
            vec![
                Atom {
                    location: Location::Word(vec![0, 1]),
                    weight: 0.25,
                },
                Atom {
                    location: Location::Word(vec![1, 0]),
                    weight: 0.75,
                },
            ],
            Provenance::External,
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        let neg = vec![Atom {
            location: Location::Word(vec![0]),
            weight: -1.0,
        }];
        assert!(AtomicMeasure::new(neg, Provenance::External).is_err());
        let dup = vec![
            Atom {
                location: Location::Word(vec![0]),
                weight: 1.0,
            };
            2
        ];
        assert!(AtomicMeasure::new(dup, Provenance::External).is_err());
        let m = sample();
        assert_eq!(m.total_mass(), 1.0);
        assert!(m.total_is_consistent(1e-12));
        assert_eq!(m.find_word(&[1, 0]), Some(1));
        assert_eq!(m.pair(|l| l.word().unwrap()[0] as f64), 0.75);
    }

    #[test]
    fn csv_round_trip_words() {
        let m = sample();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "word,weight\n01,0.25\n10,0.75\n");
        assert_eq!(AtomicMeasure::read_csv(&buf[..], Provenance::External).unwrap(), m);
    }

    #[test]
    fn csv_round_trip_points() {
        let m = AtomicMeasure::new(
            vec![Atom {
                location: Location::Point(Complex64::new(0.5, -1.25)),
                weight: 2.0,
            }],
            Provenance::BrolinLyubich,
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("location_re,location_im,weight\n"));
        assert_eq!(AtomicMeasure::read_csv(&buf[..], Provenance::BrolinLyubich).unwrap(), m);
        assert!(AtomicMeasure::read_csv(&b"a,b\n1,2\n"[..], Provenance::External).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = sample().with_beta(0.5);
        let back = AtomicMeasure::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    proptest! {
        #[test]
        fn word_text_round_trip(w in proptest::collection::vec(0u8..20, 0..12)) {
            prop_assert_eq!(word_from_text(&word_to_text(&w)).unwrap(), w);
        }
    }
}
