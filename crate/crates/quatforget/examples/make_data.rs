//! Regenerates the shipped principal-datum files in data/.
//!
//! Each file holds a JSON datum (alg, order, ideal, mu) for the
//! deterministic presentation of one small discriminant.

use num_bigint::BigInt;

use quatforget::json::DatumJson;
use quatforget::lattice::{maximal_order, LeftIdeal};
use quatforget::polarization::make_principal_datum;
use quatforget::quaternion::find_presentation;

fn main() {
    let dir = format!("{}/data", env!("CARGO_MANIFEST_DIR"));
    std::fs::create_dir_all(&dir).expect("create data dir");
    for d in [6u64, 10, 14, 15, 21, 22, 26, 33, 34, 35] {
        let alg = find_presentation(&BigInt::from(d), 1000).expect("presentation");
        let order = maximal_order(&alg).expect("maximal order");
        let ideal = LeftIdeal::from_order(&order).expect("unit ideal");
        let datum = make_principal_datum(&order, &ideal, 50).expect("principal datum");
        let json = DatumJson::from_parts(datum.order(), datum.ideal(), datum.mu());
        let path = format!("{dir}/datum_D{d}.json");
        let text = serde_json::to_string_pretty(&json).expect("serialize");
        std::fs::write(&path, text + "\n").expect("write datum");
        println!("wrote {path}");
    }
}
