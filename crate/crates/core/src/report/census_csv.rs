use super::ReportError;
use crate::census::UnsafeFinding;

pub const CENSUS_HEADER: [&str; 9] = [
    "module", "version", "package", "file", "line", "column", "token", "context", "snippet",
];

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

/// One row per finding in the given order, RFC 4180 quoting, LF endings.
pub fn emit_census_csv(findings: &[UnsafeFinding]) -> String {
    let mut w = writer();
    w.write_record(CENSUS_HEADER).expect("in-memory write");
    for f in findings {
        let line = f.line.to_string();
        let column = f.column.to_string();
        w.write_record([
            f.module_path.as_str(),
            &f.module_version,
            &f.package_path,
            &f.file,
            &line,
            &column,
            f.token.as_str(),
            f.context.as_str(),
            &f.snippet,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn parse_census_csv(text: &str) -> Result<Vec<UnsafeFinding>, ReportError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(CENSUS_HEADER) {
        return Err(ReportError::InvalidRecord {
            line: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| ReportError::InvalidRecord { line, message };
        let num = |i: usize| -> Result<u32, ReportError> {
            record[i]
                .parse()
                .map_err(|_| bad(format!("invalid number {:?}", &record[i])))
        };
        out.push(UnsafeFinding {
            module_path: record[0].to_string(),
            module_version: record[1].to_string(),
            package_path: record[2].to_string(),
            file: record[3].to_string(),
            line: num(4)?,
            column: num(5)?,
            token: record[6]
                .parse()
                .map_err(|_| bad(format!("unknown token {:?}", &record[6])))?,
            context: record[7]
                .parse()
                .map_err(|_| bad(format!("unknown context {:?}", &record[7])))?,
            snippet: record[8].to_string(),
        });
    }
    Ok(out)
}
