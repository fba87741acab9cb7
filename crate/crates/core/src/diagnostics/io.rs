use std::io::{Read, Write};

use super::row::EnergyLedgerRow;
use crate::error::{CoreError, Result};

fn csv_err(e: csv::Error) -> CoreError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => CoreError::Io(e),
        other => CoreError::Schema(format!("{other:?}")),
    }
}

/// Writes a header row and one line per row; floats use the shortest
/// representation that reads back to the same value.
pub fn write_ledger_csv(w: impl Write, rows: &[EnergyLedgerRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(csv_err)?;
    }
    if rows.is_empty() {
        wtr.write_record(EnergyLedgerRow::COLUMNS).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a ledger CSV, requiring exactly the ledger columns in order.
pub fn read_ledger_csv(r: impl Read) -> Result<Vec<EnergyLedgerRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    for (i, want) in EnergyLedgerRow::COLUMNS.iter().enumerate() {
        match header.get(i) {
            Some(h) if h == *want => {}
            Some(h) => return Err(CoreError::Schema(format!("column {i}: expected `{want}`, found `{h}`"))),
            None => return Err(CoreError::Schema(format!("missing column `{want}`"))),
        }
    }
    if header.len() > EnergyLedgerRow::COLUMNS.len() {
        return Err(CoreError::Schema(format!("unexpected column `{}`", &header[EnergyLedgerRow::COLUMNS.len()])));
    }
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec.map_err(csv_err)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> EnergyLedgerRow {
        EnergyLedgerRow::from_values([t, 0.1, 1.0 / 3.0, 1e-300, 2.5e17, 0.0, 7.0, f64::MIN_POSITIVE])
    }

    #[test]
    fn round_trip_is_exact() {
        let rows = vec![row(0.0), row(0.125)];
        let mut buf = Vec::new();
        write_ledger_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,l2_sq,grad_sq,damp_diss,cum_grad,cum_damp,ledger_lhs,max_speed\n"));
        assert_eq!(read_ledger_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn empty_ledger_keeps_header() {
        let mut buf = Vec::new();
        write_ledger_csv(&mut buf, &[]).unwrap();
        assert!(read_ledger_csv(buf.as_slice()).unwrap().is_empty());
    }

    #[test]
    fn schema_errors_name_the_column() {
        let e = read_ledger_csv("t,l2_sq,grad_sq\n0,0,0\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("damp_diss"), "{e}");
        let e = read_ledger_csv("t,l2,grad_sq\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("l2_sq"), "{e}");
    }
}
