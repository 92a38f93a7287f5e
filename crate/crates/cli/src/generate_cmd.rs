//! `sscqp generate`: write a suite of planted instances plus manifest.csv.

use std::fs;
use std::io::Write as _;

use rayon::prelude::*;

use sscqp::generator::{generate, GeneratedInstance, InstanceSpec};
use sscqp::io::{format_value, write_generated};
use sscqp::rng::derive_seed;

use crate::error::CliError;
use crate::workers::thread_pool;
use crate::GenerateArgs;

/// Instance `i` of a batch is produced from the derived seed
/// `derive_seed(seed, i)`, matching the library's sequential batch helper,
/// so parallel workers reproduce it file-for-file.
pub fn run(args: &GenerateArgs) -> Result<u8, CliError> {
    let spec = InstanceSpec::with_value_scale(
        args.n,
        (args.beta_lb, args.beta_ub),
        args.seed,
        args.value_scale,
    )?;
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    fs::create_dir_all(&args.out)?;

    let pool = thread_pool()?;
    let base_seed = args.seed;
    let instances: Vec<GeneratedInstance> = pool.install(|| {
        (0..args.count)
            .into_par_iter()
            .map(|i| {
                generate(&spec.reseeded(derive_seed(base_seed, i as u64))).map_err(|e| {
                    CliError::Usage(format!("instance {i} of {}: {e}", args.count))
                })
            })
            .collect::<Result<_, _>>()
    })?;

    let width = args.count.saturating_sub(1).to_string().len().max(4);
    let mut manifest = String::from("id,seed,beta,norm_M\n");
    for (i, inst) in instances.iter().enumerate() {
        let id = format!("instance_{i:0width$}");
        write_generated(inst, &args.out.join(format!("{id}.sscqp")))?;
        manifest.push_str(&format!(
            "{id},{},{},{}\n",
            inst.seed(),
            format_value(inst.beta()),
            format_value(inst.norm_m()),
        ));
    }
    let mut file = fs::File::create(args.out.join("manifest.csv"))?;
    file.write_all(manifest.as_bytes())?;

    println!(
        "wrote {} instance file(s) and manifest.csv to {}",
        args.count,
        args.out.display()
    );
    Ok(0)
}
