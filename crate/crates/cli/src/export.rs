//! Per-vertex angular mean `√(4π) u_00` as CSV or legacy ASCII VTK.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rte_pml::assembly::Field;
use rte_pml::mesh::Mesh2D;

use crate::config::FieldFormat;
use crate::CliError;

/// Writes the angular mean of `field` to `stem` plus the format's extension
/// and returns the path written.
pub fn export_field(field: &Field, mesh: &Mesh2D, format: FieldFormat, stem: &Path) -> Result<PathBuf, CliError> {
    if field.n_vertices() != mesh.n_vertices() {
        return Err(CliError::Config(format!(
            "field has {} vertices, mesh {}",
            field.n_vertices(),
            mesh.n_vertices()
        )));
    }
    if let Some(dir) = stem.parent() {
        fs::create_dir_all(dir)?;
    }
    let mean = field.angular_mean();
    match format {
        FieldFormat::Csv => {
            let path = stem.with_extension("csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["x", "y", "mean"])?;
            for (p, m) in mesh.vertices().iter().zip(&mean) {
                w.write_record([p[0].to_string(), p[1].to_string(), format!("{m:e}")])?;
            }
            w.flush()?;
            Ok(path)
        }
        FieldFormat::Vtk => {
            let path = stem.with_extension("vtk");
            let mut w = BufWriter::new(File::create(&path)?);
            write_vtk(&mut w, mesh, &mean)?;
            w.flush()?;
            Ok(path)
        }
    }
}

fn write_vtk(w: &mut impl Write, mesh: &Mesh2D, mean: &[f64]) -> std::io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "angular mean")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    let nt = mesh.n_triangles();
    writeln!(w, "CELLS {nt} {}", 4 * nt)?;
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
    writeln!(w, "SCALARS angular_mean double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for m in mean {
        writeln!(w, "{m:e}")?;
    }
    Ok(())
}
