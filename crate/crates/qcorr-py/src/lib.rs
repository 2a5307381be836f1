use pyo3::prelude::*;

#[pymodule]
fn qcorr_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
