//! FASTA and variants TSV writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::bubble::Bubble;
use super::coverage::SnpCall;
use super::VariantError;

const FASTA_WIDTH: usize = 60;

fn write_wrapped<W: Write>(w: &mut W, seq: &[u8]) -> std::io::Result<()> {
    for line in seq.chunks(FASTA_WIDTH) {
        w.write_all(line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Two records per bubble, `<id>_A` and `<id>_B`, in id order.
pub fn write_fasta<W: Write>(bubbles: &[Bubble], mut w: W) -> std::io::Result<()> {
    let mut sorted: Vec<&Bubble> = bubbles.iter().collect();
    sorted.sort_by_key(|b| b.id);
    for b in sorted {
        writeln!(w, ">{:016x}_A", b.id)?;
        write_wrapped(&mut w, b.label_a.as_bytes())?;
        writeln!(w, ">{:016x}_B", b.id)?;
        write_wrapped(&mut w, b.label_b.as_bytes())?;
    }
    w.flush()
}

pub fn save_fasta(bubbles: &[Bubble], path: &Path) -> Result<(), VariantError> {
    let io = |source| VariantError::Io {
        path: path.to_path_buf(),
        source,
    };
    write_fasta(bubbles, BufWriter::new(File::create(path).map_err(io)?)).map_err(io)
}

/// Tab-separated calls sorted by `(bubble_id, offset)`, one classification
/// column per color.
pub fn write_variants<W: Write>(
    calls: &[SnpCall],
    colors: &[String],
    mut w: W,
) -> std::io::Result<()> {
    write!(w, "bubble_id\toffset\tallele_a\tallele_b\tpredicted")?;
    for c in colors {
        write!(w, "\t{c}")?;
    }
    writeln!(w)?;
    let mut sorted: Vec<&SnpCall> = calls.iter().collect();
    sorted.sort_by_key(|c| (c.bubble_id, c.offset));
    for c in sorted {
        write!(
            w,
            "{:016x}\t{}\t{}\t{}\t{}",
            c.bubble_id, c.offset, c.allele_a as char, c.allele_b as char, c.predicted
        )?;
        for class in &c.classes {
            write!(w, "\t{class}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn save_variants(
    calls: &[SnpCall],
    colors: &[String],
    path: &Path,
) -> Result<(), VariantError> {
    let io = |source| VariantError::Io {
        path: path.to_path_buf(),
        source,
    };
    write_variants(
        calls,
        colors,
        BufWriter::new(File::create(path).map_err(io)?),
    )
    .map_err(io)
}
