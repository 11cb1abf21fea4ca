//! Truth-table file format and layout-descriptor serialization.
//!
//! A truth-table file is a header line `n=<int>` followed by the table as
//! hex digits: digit `j` encodes bits `4j..4j+3`, little-endian within the
//! digit (bit `4j` is the digit's least significant bit). Functions on fewer
//! than two variables still occupy one digit, with unused bits zero.

use std::io::{BufRead, Write};

use super::{Layout, TruthTable};
use crate::error::{Error, Result};

pub fn write_truth_table(mut w: impl Write, t: &TruthTable) -> Result<()> {
    writeln!(w, "n={}", t.n())?;
    let digits = (t.num_points() as usize / 4).max(1);
    let mut line = String::with_capacity(digits + 1);
    for j in 0..digits {
        let word = t.words()[j / 16];
        let nibble = (word >> ((j % 16) * 4)) & 0xF;
        line.push(char::from_digit(nibble as u32, 16).expect("nibble"));
    }
    writeln!(w, "{line}")?;
    Ok(())
}

pub fn read_truth_table(r: impl BufRead) -> Result<TruthTable> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        at: "line 1".into(),
        msg: "empty file".into(),
    })??;
    let n: usize = header
        .trim()
        .strip_prefix("n=")
        .ok_or_else(|| Error::Parse {
            at: "line 1".into(),
            msg: "expected `n=<int>`".into(),
        })?
        .parse()
        .map_err(|e| Error::Parse {
            at: "line 1".into(),
            msg: format!("bad variable count: {e}"),
        })?;
    if n > super::MAX_VARS {
        return Err(Error::TooManyVariables(n));
    }
    let expected = ((1usize << n) / 4).max(1);
    let mut words = vec![0u64; super::words_for(n)];
    let mut j = 0usize;
    for (lineno, line) in lines.enumerate() {
        for c in line?.chars() {
            if c.is_whitespace() {
                continue;
            }
            let nibble = c.to_digit(16).ok_or_else(|| Error::Parse {
                at: format!("line {}, digit {}", lineno + 2, j + 1),
                msg: format!("invalid hex digit {c:?}"),
            })? as u64;
            if j >= expected {
                return Err(Error::Parse {
                    at: format!("line {}, digit {}", lineno + 2, j + 1),
                    msg: format!("too many digits (expected {expected})"),
                });
            }
            words[j / 16] |= nibble << ((j % 16) * 4);
            j += 1;
        }
    }
    if j != expected {
        return Err(Error::Parse {
            at: "end of file".into(),
            msg: format!("expected {expected} hex digits, found {j}"),
        });
    }
    if n < 6 && words[0] & !super::used_mask(n) != 0 {
        return Err(Error::Parse {
            at: "table body".into(),
            msg: "bits set beyond 2^n".into(),
        });
    }
    Ok(TruthTable::from_words(n, words))
}

pub fn write_layout(w: impl Write, layout: &Layout) -> Result<()> {
    serde_json::to_writer_pretty(w, layout).map_err(|e| Error::Parse {
        at: "layout".into(),
        msg: e.to_string(),
    })
}

pub fn read_layout(r: impl BufRead) -> Result<Layout> {
    serde_json::from_reader(r).map_err(|e| Error::Parse {
        at: "layout".into(),
        msg: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{parity, LayoutBlock};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn known_encoding() {
        // parity(2): bits 0110 -> single digit 6.
        let mut buf = Vec::new();
        write_truth_table(&mut buf, &parity(2).unwrap()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n=2\n6\n");
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_truth_table("m=3\nff".as_bytes()).is_err());
        assert!(read_truth_table("n=3\nfg".as_bytes()).is_err());
        assert!(read_truth_table("n=3\nfff".as_bytes()).is_err());
        assert!(read_truth_table("n=3\nf".as_bytes()).is_err());
    }

    #[test]
    fn layout_round_trip() {
        let layout = Layout {
            n: 4,
            blocks: vec![
                LayoutBlock {
                    name: "x".into(),
                    level: Some(1),
                    part: None,
                    coords: vec![1, 2],
                },
                LayoutBlock {
                    name: "z".into(),
                    level: None,
                    part: None,
                    coords: vec![3, 4],
                },
            ],
        };
        let mut buf = Vec::new();
        write_layout(&mut buf, &layout).unwrap();
        assert_eq!(read_layout(buf.as_slice()).unwrap(), layout);
    }

    proptest! {
        #[test]
        fn table_round_trip(n in 1usize..=10, seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = TruthTable::from_fn(n, |_| rng.gen_bool(0.5)).unwrap();
            let mut buf = Vec::new();
            write_truth_table(&mut buf, &t).unwrap();
            prop_assert_eq!(read_truth_table(buf.as_slice()).unwrap(), t);
        }
    }
}
