//! CSV import, the binary `CSLD` container, and CSV export.
//!
//! `cargo run --example container_roundtrip`

use std::io::Cursor;

use csl::dataset::{export_csv, import_csv, read_from, to_bytes, CsvSchema};

const CSV: &str = "\
f0,f1,f2,gender,profession
0.10,-1.20,0.33,f,nurse
0.80,0.05,-0.41,m,surgeon
-0.35,0.90,1.10,f,surgeon
0.02,0.44,-0.07,m,nurse
";

fn main() -> csl::Result<()> {
    let schema = CsvSchema { features: Vec::new(), labels: vec!["gender".into(), "profession".into()] };
    let ds = import_csv(Cursor::new(CSV), &schema, "inline example")?;
    for c in ds.concepts() {
        println!("{}: classes {:?}, labels {:?}", c.name(), c.class_names(), c.labels());
    }

    let bytes = to_bytes(&ds)?;
    println!("container: {} bytes, magic {:?}", bytes.len(), std::str::from_utf8(&bytes[..4]).unwrap());
    let back = read_from(Cursor::new(&bytes))?;
    assert_eq!(to_bytes(&back)?, bytes);

    let mut out = Vec::new();
    export_csv(&back, &mut out)?;
    print!("{}", String::from_utf8(out).unwrap());
    Ok(())
}
