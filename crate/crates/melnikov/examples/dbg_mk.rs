use melnikov::analysis::{circle_loop, continue_periods, double_well_basis};
use num_complex::Complex64;

fn main() {
    let t0 = 0.5;
    let (f, forms, cycles) = double_well_basis(t0, 512).unwrap();
    let base = Complex64::new(t0, 0.0);
    let started = std::time::Instant::now();
    let mut mats = Vec::new();
    for (name, center) in [("around t=0", 0.0), ("around t=1", 1.0)] {
        let lp = circle_loop(Complex64::new(center, 0.0), base, 48);
        let m = continue_periods(&f, &forms, &cycles, &lp).unwrap();
        println!("{name}: defect {:.2e}, det {:.8}+{:.2e}i, rounded {:?}",
            m.defect, m.det.re, m.det.im, m.rounded);
        mats.push(m);
    }
    // composition: loop0 then loop1 vs product
    let mut joined = circle_loop(Complex64::new(0.0, 0.0), base, 48);
    joined.extend(circle_loop(Complex64::new(1.0, 0.0), base, 48));
    let mc = continue_periods(&f, &forms, &cycles, &joined).unwrap();
    println!("composition: defect {:.2e}, rounded {:?}", mc.defect, mc.rounded);
    // product B·A (A = loop0 first)
    let a = &mats[0].rounded;
    let b = &mats[1].rounded;
    let mut prod = vec![vec![0i64; 3]; 3];
    for i in 0..3 { for j in 0..3 { for k in 0..3 { prod[i][j] += b[i][k] * a[k][j]; } } }
    println!("product B*A: {:?}", prod);
    println!("elapsed {:?}", started.elapsed());
}
