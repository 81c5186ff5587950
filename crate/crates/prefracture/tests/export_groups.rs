use std::path::Path;

use prefracture::formats::read_group_manifest;
use prefracture::obj::read_obj;
use prefracture::pipeline::export_groups;
use prefracture_core::geometry::{fracture, voxelize};

#[test]
fn three_groups_become_three_watertight_meshes() {
    let cube = read_obj(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/cube.obj"))).unwrap();
    let grid = voxelize(&cube, 12).unwrap();
    let set = fracture(&grid, 3, 5).unwrap();
    assert_eq!(set.len(), 3);
    let labels = [0, 1, 2];
    let dir = tempfile::tempdir().unwrap();
    let manifest = export_groups(&set, &labels, dir.path()).unwrap();
    assert_eq!(manifest.groups.len(), 3);

    let on_disk = read_group_manifest(&dir.path().join("groups.json")).unwrap();
    assert_eq!(on_disk, manifest);
    let mut total = 0.0;
    for g in &on_disk.groups {
        let mesh = read_obj(&dir.path().join(&g.file)).unwrap();
        assert!(mesh.is_watertight(), "{}", g.file);
        assert!((mesh.volume() - g.volume).abs() < 1e-9, "{}", g.file);
        total += g.volume;
    }
    assert_eq!(total, set.total_volume());
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files.len(), 4);
}

#[test]
fn one_label_over_disconnected_pieces_is_split() {
    let cube = read_obj(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/cube.obj"))).unwrap();
    let set = fracture(&voxelize(&cube, 10).unwrap(), 12, 2).unwrap();
    let labels = vec![0; set.len()];
    let dir = tempfile::tempdir().unwrap();
    let manifest = export_groups(&set, &labels, dir.path()).unwrap();
    assert_eq!(manifest.groups.len(), 1);
    let merged = read_obj(&dir.path().join("group_0.obj")).unwrap();
    assert!(merged.is_watertight());
    assert!((merged.volume() - 1.0).abs() < 1e-9);
}
