// Probe: failure-mode census for roots_in_disk on random sections.
use gaflab::model::ModelSpace;
use gaflab::randgauss::{sample_section, RngStream};
use gaflab::zeros::{roots_in_disk, ZeroSetStatus};

fn main() {
    let sp = ModelSpace::fock(1).unwrap();
    let cert = sp.truncation_order(1.5, 1e-12).unwrap();
    println!("truncation order: {}", cert.order);
    let mut valid = 0;
    let mut nonconv = 0;
    let mut boundary = 0;
    let mut invalid = 0;
    let mut err = 0;
    let mut worst: Vec<u64> = vec![];
    for i in 0..1000u64 {
        let s = sample_section(&sp, &cert, &mut RngStream::new(2024, i));
        match roots_in_disk(&s, 1.5) {
            Ok(zs) => match zs.status {
                ZeroSetStatus::Valid => valid += 1,
                ZeroSetStatus::NonConverged => {
                    nonconv += 1;
                    worst.push(i);
                }
                ZeroSetStatus::BoundaryAmbiguous => boundary += 1,
                ZeroSetStatus::Invalid => {
                    invalid += 1;
                    if worst.len() < 12 {
                        worst.push(i);
                    }
                }
            },
            Err(e) => {
                err += 1;
                println!("trial {i}: error {e}");
            }
        }
    }
    println!("valid {valid} nonconv {nonconv} boundary {boundary} invalid {invalid} err {err}");
    for &i in worst.iter().take(5) {
        let s = sample_section(&sp, &cert, &mut RngStream::new(2024, i));
        let zs = roots_in_disk(&s, 1.5).unwrap();
        println!(
            "trial {i}: status {:?} args {} mult {} resid {:.3e}",
            zs.status,
            zs.argument_count,
            zs.total_multiplicity(),
            zs.max_newton_residual
        );
    }
}
