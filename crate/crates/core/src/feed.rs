//! Text format for observation feeds.
//!
//! ```text
//! 3 1
//! -
//! - | 0.5
//! 1.25 | 0.5 | -
//! ```
//!
//! The header holds the number of steps and of columns. Line `t` holds the
//! whole of `z^t`: `t` groups of `M` tokens separated by `|`, each token a
//! value or `-` for a missing cell.

use std::fmt::Write as _;

use crate::error::{Result, SisError};
use crate::matrix::ObservationMatrix;

/// A coordinate type with a text representation.
pub trait FeedToken: Copy + PartialEq + Sized {
    fn format_token(self) -> String;
    fn parse_token(token: &str) -> Option<Self>;
}

impl FeedToken for f64 {
    fn format_token(self) -> String {
        format_f64(self)
    }

    fn parse_token(token: &str) -> Option<Self> {
        token.parse().ok().filter(|v: &f64| v.is_finite())
    }
}

impl FeedToken for bool {
    fn format_token(self) -> String {
        if self { "1" } else { "0" }.to_owned()
    }

    fn parse_token(token: &str) -> Option<Self> {
        match token {
            "1" => Some(true),
            "0" => Some(false),
            _ => None,
        }
    }
}

/// 17 significant digits: enough to round-trip every `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_feed<C: FeedToken>(feed: &[ObservationMatrix<C>]) -> String {
    let cols = feed.first().map_or(0, |z| z.cols());
    let mut out = format!("{} {}\n", feed.len(), cols);
    for z in feed {
        let groups: Vec<String> = (0..z.rows())
            .map(|i| {
                z.row(i)
                    .iter()
                    .map(|c| c.map_or_else(|| "-".to_owned(), C::format_token))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let _ = writeln!(out, "{}", groups.join(" | "));
    }
    out
}

/// Parses a feed. Shapes are checked here; monotone revelation is left to
/// [`crate::matrix::check_feed`].
pub fn read_feed<C: FeedToken>(text: &str) -> Result<Vec<ObservationMatrix<C>>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) = lines.next().ok_or(SisError::FeedParse {
        line: 1,
        reason: "missing header".into(),
    })?;
    let numbers: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| SisError::FeedParse {
            line,
            reason: format!("header `{header}` is not `T M`"),
        })?;
    let [steps, cols] = numbers[..] else {
        return Err(SisError::FeedParse {
            line,
            reason: format!("header `{header}` is not `T M`"),
        });
    };
    if steps == 0 || cols == 0 {
        return Err(SisError::FeedParse {
            line,
            reason: "a feed needs at least one step and one column".into(),
        });
    }
    let mut feed = Vec::with_capacity(steps);
    for (line, text) in lines {
        let t = feed.len() + 1;
        if t > steps {
            return Err(SisError::FeedParse {
                line,
                reason: format!("more than the {steps} steps announced in the header"),
            });
        }
        let groups: Vec<&str> = text.split('|').collect();
        if groups.len() != t {
            return Err(SisError::FeedParse {
                line,
                reason: format!("step {t} must have {t} rows, found {}", groups.len()),
            });
        }
        let mut cells = Vec::with_capacity(t * cols);
        for (i, group) in groups.iter().enumerate() {
            let tokens: Vec<&str> = group.split_whitespace().collect();
            if tokens.len() != cols {
                return Err(SisError::FeedParse {
                    line,
                    reason: format!("row {} has {} tokens, expected {cols}", i + 1, tokens.len()),
                });
            }
            for token in tokens {
                cells.push(if token == "-" {
                    None
                } else {
                    Some(C::parse_token(token).ok_or_else(|| SisError::FeedParse {
                        line,
                        reason: format!("unreadable token `{token}`"),
                    })?)
                });
            }
        }
        feed.push(ObservationMatrix::from_cells(cols, cells)?);
    }
    if feed.len() != steps {
        return Err(SisError::FeedParse {
            line: text.lines().count(),
            reason: format!("header announces {steps} steps, found {}", feed.len()),
        });
    }
    Ok(feed)
}

/// Presence-only feeds never observe an absence.
pub fn check_presence_only(feed: &[ObservationMatrix<bool>]) -> Result<()> {
    for (t, z) in feed.iter().enumerate() {
        for i in 0..z.rows() {
            for m in 0..z.cols() {
                if z.get(i, m) == Some(false) {
                    return Err(SisError::PresenceOnly {
                        t: t + 1,
                        i: i + 1,
                        m: m + 1,
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar1::{simulate_truth, Ar1Params};

    #[test]
    fn round_trip_is_exact() {
        let p = Ar1Params::new(0.5, 1.0, 0.3).unwrap();
        let truth = simulate_truth(&p, 12, 4);
        let text = write_feed(&truth.feed);
        let back: Vec<ObservationMatrix<f64>> = read_feed(&text).unwrap();
        assert_eq!(back, truth.feed);
        assert_eq!(write_feed(&back), text);
    }

    #[test]
    fn documented_example_parses() {
        let feed: Vec<ObservationMatrix<f64>> = read_feed("3 1\n-\n- | 0.5\n1.25 | 0.5 | -\n").unwrap();
        assert_eq!(feed[2].get(0, 0), Some(1.25));
        assert_eq!(feed[2].get(2, 0), None);
        crate::matrix::check_feed(&feed).unwrap();
    }

    #[test]
    fn shape_errors_name_the_line() {
        let err = read_feed::<f64>("2 1\n-\n- - | 1\n").unwrap_err();
        assert!(matches!(err, SisError::FeedParse { line: 3, .. }), "{err}");
        let err = read_feed::<f64>("3 1\n-\n").unwrap_err();
        assert!(matches!(err, SisError::FeedParse { .. }));
        let err = read_feed::<bool>("1 2\n1 x\n").unwrap_err();
        assert!(matches!(err, SisError::FeedParse { line: 2, .. }));
    }

    #[test]
    fn presence_only_violation() {
        let feed: Vec<ObservationMatrix<bool>> = read_feed("2 3\n- 1 -\n- 1 - | 0 1 -\n").unwrap();
        assert_eq!(
            check_presence_only(&feed),
            Err(SisError::PresenceOnly { t: 2, i: 2, m: 1 })
        );
    }
}
