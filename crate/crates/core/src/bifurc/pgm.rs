use super::{CellClass, Raster};

/// Grey level of escape cells.
pub const PGM_ESCAPE: u8 = 255;
/// Grey level of undecided cells.
pub const PGM_UNDECIDED: u8 = 128;
/// Capture cells are drawn at `PGM_CAPTURE_STEP · min(k, 25)`, so depth 0 is
/// black and deeper captures get lighter, staying below 128.
pub const PGM_CAPTURE_STEP: u8 = 4;

pub fn class_level(class: &CellClass) -> u8 {
    match class {
        CellClass::Escape => PGM_ESCAPE,
        CellClass::Undecided => PGM_UNDECIDED,
        CellClass::Capture { k } => PGM_CAPTURE_STEP * (*k).min(25) as u8,
    }
}

/// Binary (`P5`) class map, row 0 at the top. Each comment line is written
/// into the header after a `# `.
pub fn class_map_pgm(raster: &Raster, comments: &[String]) -> Vec<u8> {
    let n = raster.spec.resolution;
    let mut out = b"P5\n".to_vec();
    for c in comments {
        for line in c.lines() {
            out.extend_from_slice(format!("# {line}\n").as_bytes());
        }
    }
    out.extend_from_slice(format!("{n} {n}\n255\n").as_bytes());
    out.extend(raster.cells.iter().map(|c| class_level(&c.class)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifurc::{Budgets, GridSpec, RasterCell};
    use crate::C64;
    use std::collections::BTreeMap;

    #[test]
    fn header_and_payload() {
        let spec = GridSpec::new(C64::new(0.0, 0.0), 1.0, 2).unwrap();
        let classes =
            [CellClass::Escape, CellClass::Undecided, CellClass::Capture { k: 0 }, CellClass::Capture { k: 3 }];
        let cells = spec
            .points()
            .zip(classes)
            .map(|(a, class)| RasterCell { a, class, lyapunov: None, component: None, aux: BTreeMap::new() })
            .collect();
        let r = Raster { spec, budgets: Budgets::default(), cells, components: 1 };
        let bytes = class_map_pgm(&r, &["config {}".into()]);
        let header = b"P5\n# config {}\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[255, 128, 0, 12]);
    }
}
