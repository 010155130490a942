//! Subcommand implementations.

use std::error::Error;
use std::fs;
use std::path::PathBuf;

use trident_core::harness::{
    self, build_model, run_cross_validation, run_fold, DatasetManifest, Metrics, PreparedDataset,
    Representation,
};
use trident_core::model::{load_model, AnyModel};
use trident_core::nn::run_layer_suite;
use trident_core::rdp::{self, RdpOptions};
use trident_core::seed;
use trident_core::sim::{generate_dataset, DatasetRecipe};

use crate::{
    CrossvalArgs, EvaluateArgs, GradcheckArgs, PresetArg, ProcessArgs, SimulateArgs, TrainArgs,
};

type CliResult = Result<(), Box<dyn Error>>;

pub fn simulate(args: SimulateArgs) -> CliResult {
    let mut recipe = match (&args.preset, &args.recipe) {
        (Some(PresetArg::Desk), None) => DatasetRecipe::desk(1),
        (Some(PresetArg::Smoke), None) => DatasetRecipe::smoke(1),
        (Some(PresetArg::RangeContrast), None) => DatasetRecipe::range_contrast(1),
        (None, Some(path)) => DatasetRecipe::from_path(path)?,
        _ => unreachable!("clap enforces exactly one of --preset/--recipe"),
    };
    if let Some(seed_value) = args.seed {
        recipe.dataset.seed = seed_value;
    }
    recipe.validate()?;

    let (t, m, n) = recipe.cube_dims();
    println!(
        "simulating {} tests x {} antennas x {} crops ({} classes, {t}x{m}x{n} cubes, seed {})",
        recipe.total_tests(),
        recipe.radar.antenna_count,
        recipe.dataset.crops_per_test,
        recipe.classes(),
        recipe.dataset.seed,
    );
    let out = generate_dataset(&recipe, &args.out)?;
    println!("wrote {} records under {}", out.records, out.root.display());
    Ok(())
}

pub fn process(args: ProcessArgs) -> CliResult {
    let mut inputs: Vec<PathBuf> = if args.raw.is_dir() {
        fs::read_dir(&args.raw)?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "raws"))
            .collect()
    } else {
        vec![args.raw.clone()]
    };
    inputs.sort();
    if inputs.is_empty() {
        return Err(format!("no .raws recordings found under {}", args.raw.display()).into());
    }

    fs::create_dir_all(&args.out)?;
    let options = RdpOptions { clutter_filter: args.clutter_filter, ..RdpOptions::default() };
    let mut written = 0usize;
    for input in &inputs {
        let raw = harness::read_raw_signal(input)?;
        let cube = rdp::range_doppler_process(&raw, &options)?;
        let stem = input
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| format!("cannot derive a name from {}", input.display()))?;
        match args.crop_frames {
            Some(crop_frames) => {
                for (index, crop) in
                    rdp::crop_cube(&cube, crop_frames, args.crops)?.iter().enumerate()
                {
                    harness::write_cube(&args.out.join(format!("{stem}_c{index}.trdc")), crop)?;
                    written += 1;
                }
            }
            None => {
                harness::write_cube(&args.out.join(format!("{stem}.trdc")), &cube)?;
                written += 1;
            }
        }
    }
    println!(
        "processed {} recording(s) into {} cube file(s) under {}",
        inputs.len(),
        written,
        args.out.display()
    );
    Ok(())
}

pub fn train(args: TrainArgs) -> CliResult {
    let config = args.overrides.resolve()?;
    let manifest = DatasetManifest::load(&config.dataset_dir)?;
    let data = PreparedDataset::load(&manifest, config.representation)?;
    println!(
        "loaded {} records ({} classes, representation {})",
        data.len(),
        data.classes,
        config.representation.name()
    );

    let mut model = match args.hold_out {
        Some(antenna) => {
            let fold = fold_index(&data, antenna);
            let (model, report) = run_fold(&data, fold, antenna, &config)?;
            print_history(&report.history);
            println!(
                "held-out antenna {antenna}: accuracy {:.4} ({}/{} records)",
                report.metrics.accuracy,
                report.metrics.trace(),
                report.metrics.total()
            );
            print_confusion(&report.metrics);
            model
        }
        None => {
            let mut model = build_model(&config, &data, config.seed)?;
            let indices: Vec<usize> = (0..data.len()).collect();
            match &mut model {
                AnyModel::ThreeBranch(m) => m.norm = data.fit_triple_norm(&indices)?,
                AnyModel::Spectro(m) => m.norm = data.fit_plane_norm(&indices)?,
            }
            let train_config = config.train.clone().with_seed(config.seed);
            let outcome = harness::train(&mut model, &data, &indices, &train_config)?;
            print_history(&outcome.history);
            model
        }
    };

    model.save(&args.model_out)?;
    println!("saved {} model to {}", model.kind_name(), args.model_out.display());
    Ok(())
}

/// Position of `antenna` among the sorted distinct antenna ids (the fold
/// index `crossval` would assign it).
fn fold_index(data: &PreparedDataset, antenna: usize) -> usize {
    let mut antennas = data.antennas.clone();
    antennas.sort_unstable();
    antennas.dedup();
    antennas.iter().position(|&a| a == antenna).unwrap_or(0)
}

fn print_history(history: &[harness::EpochStats]) {
    for stats in history {
        println!(
            "epoch {:>3}: loss {:.6}, train accuracy {:.4}",
            stats.epoch, stats.loss, stats.train_accuracy
        );
    }
}

fn print_confusion(metrics: &Metrics) {
    print!("true\\pred");
    for c in 0..metrics.confusion.len() {
        print!("{c:>6}");
    }
    println!();
    for (class, row) in metrics.confusion.iter().enumerate() {
        print!("{class:>9}");
        for count in row {
            print!("{count:>6}");
        }
        println!();
    }
}

pub fn evaluate(args: EvaluateArgs) -> CliResult {
    let model = load_model(&args.model)?;
    let representation = match &model {
        AnyModel::ThreeBranch(_) => Representation::Cube3d,
        AnyModel::Spectro(_) => Representation::Spectrogram,
    };
    println!("loaded {} model ({} classes)", model.kind_name(), model.classes());

    let manifest = DatasetManifest::load(&args.dataset)?;
    let data = PreparedDataset::load(&manifest, representation)?;
    let indices: Vec<usize> = match args.antenna {
        Some(antenna) => {
            let (_, test) = harness::split_leave_one_antenna_out(&manifest, antenna)?;
            test
        }
        None => (0..data.len()).collect(),
    };

    let metrics = harness::evaluate(&model, &data, &indices)?;
    println!(
        "accuracy {:.4} ({}/{} records)",
        metrics.accuracy,
        metrics.trace(),
        metrics.total()
    );
    print_confusion(&metrics);
    Ok(())
}

pub fn crossval(args: CrossvalArgs) -> CliResult {
    let mut config = args.overrides.resolve()?;
    if let Some(out) = args.out {
        config.output_dir = Some(out);
    }

    let report = run_cross_validation(&config)?;
    for fold in &report.folds {
        println!(
            "fold {} (held-out antenna {}): accuracy {:.4} ({}/{}), {} epochs",
            fold.fold,
            fold.held_out_antenna,
            fold.metrics.accuracy,
            fold.metrics.trace(),
            fold.metrics.total(),
            fold.history.len()
        );
    }
    println!(
        "mean accuracy over {} folds: {:.4}",
        report.folds.len(),
        report.mean_accuracy()
    );
    print_confusion(&report.aggregate);
    if let Some(dir) = &config.output_dir {
        println!("reports written to {}", dir.display());
    }
    Ok(())
}

pub fn gradcheck(args: GradcheckArgs) -> CliResult {
    println!(
        "checking analytic gradients against central finite differences \
         ({} seed(s) per layer, master seed {})",
        args.seeds, args.seed
    );
    // Nudge the master seed through the derivation used everywhere else so
    // `--seed 1` and `--seed 2` give unrelated probes.
    let master = seed::derive(args.seed, 0x6772_6164);
    let checks = run_layer_suite(master, args.seeds);

    println!("{:<22} {:>10} {:>12}  status", "layer", "tolerance", "max rel err");
    let mut all_passed = true;
    for check in &checks {
        let status = if check.passed() { "PASS" } else { "FAIL" };
        all_passed &= check.passed();
        println!(
            "{:<22} {:>10.0e} {:>12.3e}  {status}",
            check.name, check.tolerance, check.max_rel_err
        );
    }

    let e2e = trident_core::model::end_to_end_gradcheck(master);
    let e2e_ok = e2e < 1e-4;
    all_passed &= e2e_ok;
    println!(
        "{:<22} {:>10.0e} {:>12.3e}  {}",
        "model_end_to_end",
        1e-4,
        e2e,
        if e2e_ok { "PASS" } else { "FAIL" }
    );

    if all_passed {
        println!("all {} checks passed", checks.len() + 1);
        Ok(())
    } else {
        Err("gradient verification failed".into())
    }
}
