use tileflow::isohedral::*;
use tileflow::field::FourierParams;
use tileflow::geom::AffineMap;
use tileflow::flow::IntegratorConfig;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    // Worst case per acceptance: sup-norm 0.1, omega 3, all classes.
    for class in IsohedralClass::ALL {
        let t = default_template(class).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut params = FourierParams::zeros(3, 3);
        for c in params.coeffs_mut() {
            *c = rng.gen_range(-0.1..0.1);
        }
        let field = build_class_field(params, &t, AffineMap::IDENTITY).unwrap();
        let mut maxv: f64 = 0.0;
        for i in 0..t.boundary.len() {
            let (a, b) = t.boundary.edge(i);
            for k in 0..50 {
                let p = a + (b - a) * (k as f64 / 50.0);
                maxv = maxv.max(field.eval(p).norm());
            }
        }
        print!("{}: br={} max|V|={:.2}", class.name(), field.branch_count(), maxv);
        for steps in [32usize, 128, 512] {
            let r = deform_tile(&t, &field, &IntegratorConfig::new(steps), 64);
            match r {
                Ok(poly) => {
                    let rep = verify_tiling(&poly, &t, 3000, 5).unwrap();
                    print!("  s{steps}:{}", if rep.pass() { "PASS" } else { "fail" });
                }
                Err(_) => print!("  s{steps}:XPOLY"),
            }
        }
        println!();
    }
}
