use std::path::Path;

use neurocollide::robot::{desk_arm, load_robot, DESK_ARM_NAME};

#[test]
fn checked_in_desk_arm_matches_the_builtin() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/desk-arm/desk-arm.json");
    let loaded = load_robot(&path).unwrap();
    let builtin = desk_arm();
    assert_eq!(loaded.name(), DESK_ARM_NAME);
    assert_eq!(loaded.dof(), 6);
    assert_eq!(loaded.collision_mask(), builtin.collision_mask());
    assert_eq!(loaded.content_hash(), builtin.content_hash());
}
