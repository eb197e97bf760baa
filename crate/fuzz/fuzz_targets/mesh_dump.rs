#![no_main]

use libfuzzer_sys::fuzz_target;
use nitsche_core::Mesh;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(mesh) = Mesh::from_dump(text) else { return };
    // accepted meshes survive a dump round trip
    let again = Mesh::from_dump(&mesh.dump_string()).expect("re-parse of own dump");
    assert_eq!(again.triangles, mesh.triangles);
    assert_eq!(again.vertices, mesh.vertices);
    assert_eq!(again.boundary_facets, mesh.boundary_facets);
});
