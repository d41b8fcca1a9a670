//! Replays the first level of a synthesis far enough to inspect the
//! intermediate objects that the report does not carry.

use qirw_core::anchor::{fixgeo_retrying, Fixgeo};
use qirw_core::extension::{find_spanning_geodesic, Profile};
use qirw_core::qi::{surjectivize, QiFrame, Surjectivization};
use qirw_core::{Error, Path, PathDecomposition};

use crate::instance::Instance;
use crate::Result;

pub struct LocalStage {
    pub quotient: Surjectivization,
    /// Normalised decomposition of the quotient.
    pub decomposition: PathDecomposition,
    /// Measured `C` of the input map.
    pub measured: u64,
    /// `C` handed to the geodesic search: the quotient's measured `C`, at least 2.
    pub c: u64,
    pub geodesic: Path,
    pub fixgeo: Fixgeo,
}

/// Runs contraction, the spanning geodesic and the anchor weighting on a
/// connected instance. `None` when the quotient is a single vertex.
pub fn replay_local(inst: &Instance) -> Result<Option<LocalStage>> {
    let not_qi = || Error::Input("map is not a quasi-isometry".into());
    let measured = QiFrame::new(&inst.g, &inst.h, None, &inst.phi)?.measure().ok_or_else(not_qi)?;
    let quotient = surjectivize(&inst.h, &inst.d, &inst.phi, measured)?;
    if quotient.quotient.vertex_count() == 1 {
        return Ok(None);
    }
    let decomposition = quotient.decomposition.normalize_nowhere_null();
    let c = QiFrame::new(&inst.g, &quotient.quotient, None, &quotient.map)?
        .measure()
        .ok_or_else(not_qi)?
        .max(2);
    let geodesic = find_spanning_geodesic(&inst.g, &quotient.quotient, &decomposition, &quotient.map, c)?;
    let fixgeo = fixgeo_retrying(&inst.g, &quotient.quotient, &quotient.map, &geodesic, c, Profile::Checked)?;
    Ok(Some(LocalStage { quotient, decomposition, measured, c, geodesic, fixgeo }))
}
