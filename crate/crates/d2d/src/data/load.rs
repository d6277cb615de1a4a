//! Columnar rating-file parsing with a configurable delimiter.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::data::RatingRecord;
use crate::error::{Error, Result};

/// Shape of one rating line: the field delimiter and whether a trailing
/// timestamp column is expected.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingFormat {
    pub delimiter: String,
    pub with_timestamp: bool,
}

impl RatingFormat {
    pub fn new(delimiter: impl Into<String>, with_timestamp: bool) -> Self {
        RatingFormat {
            delimiter: delimiter.into(),
            with_timestamp,
        }
    }

    /// MovieLens `ratings.dat`: `user::item::rating::timestamp`.
    pub fn movielens() -> Self {
        RatingFormat::new("::", true)
    }

    /// Amazon ratings-only CSV export: `user,item,rating,timestamp`.
    pub fn csv() -> Self {
        RatingFormat::new(",", true)
    }

    fn n_fields(&self) -> usize {
        if self.with_timestamp {
            4
        } else {
            3
        }
    }
}

/// Parses `user<delim>item<delim>rating[<delim>timestamp]` lines. Any
/// malformed line aborts with its line number; an empty stream is fine.
pub fn load_ratings(source: impl BufRead, format: &RatingFormat) -> Result<Vec<RatingRecord>> {
    let expected = format.n_fields();
    let mut records = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(format.delimiter.as_str()).collect();
        if fields.len() != expected {
            return Err(Error::Parse {
                location: format!("line {lineno}"),
                message: format!(
                    "expected {expected} fields separated by '{}', found {}",
                    format.delimiter,
                    fields.len()
                ),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::Parse {
                location: format!("line {lineno}"),
                message: "empty user or item id".to_string(),
            });
        }
        let rating: f64 = fields[2].parse().map_err(|_| Error::Parse {
            location: format!("line {lineno}"),
            message: format!("rating '{}' is not a number", fields[2]),
        })?;
        let timestamp = if format.with_timestamp {
            Some(fields[3].parse::<i64>().map_err(|_| Error::Parse {
                location: format!("line {lineno}"),
                message: format!("timestamp '{}' is not an integer", fields[3]),
            })?)
        } else {
            None
        };
        records.push(RatingRecord {
            user_id: fields[0].to_string(),
            item_id: fields[1].to_string(),
            rating,
            timestamp,
        });
    }
    Ok(records)
}

/// [`load_ratings`] against a file path, with the path worked into any error.
pub fn load_ratings_file(path: &Path, format: &RatingFormat) -> Result<Vec<RatingRecord>> {
    let file = File::open(path)
        .map_err(|e| Error::Data(format!("cannot open ratings file {}: {e}", path.display())))?;
    load_ratings(BufReader::new(file), format).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}:{location}", path.display()),
            message,
        },
        other => other,
    })
}
