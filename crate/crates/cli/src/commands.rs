use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use reactmotion::diff::Checkpoint;
use reactmotion::losses::LossSubset;
use reactmotion::motion::{
    import_sbu_dir, make_synthetic_dataset, normalize_interaction, read_dataset, split_loso,
    window_all, write_clip, write_dataset, Joint, SbuImportOptions, SyntheticSpec,
};
use reactmotion::train::{
    afd_all, generator_variants, loss_variants, mean_by_class, nn_baseline_batch,
    pipeline_grad_check, recognition_accuracy, run_ablation, synthesize_all, train_gan_with,
    train_recognizer, Classifier, RecognizerConfig, RecognizerInput,
};
use reactmotion::{Generator, InteractionClip, Motion, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::config::{existing, record_beside, record_in, usage, FileConfig, RunRecord};
use crate::{
    AblateArgs, AblationKind, BaselineNnArgs, EvalAfdArgs, EvalRecognitionArgs,
    ExportAttentionArgs, ExportMotionArgs, GradCheckArgs, ImportSbuArgs, RecognizerFlags, Subset,
    SynthDataArgs, SynthesizeArgs, TrainArgs, TrainFlags,
};

const DATA_ENV: &str = "REACTMOTION_DATA";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct ImportSection {
    window: usize,
    stride: usize,
    normalize: bool,
}

impl Default for ImportSection {
    fn default() -> Self {
        ImportSection {
            window: 40,
            stride: 5,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SynthSection {
    seed: u64,
    #[serde(flatten)]
    spec: SyntheticSpec,
}

fn load_clips(path: &Path, what: &str) -> Result<Vec<InteractionClip>> {
    let path = existing(path, what)?;
    let clips = read_dataset(&path)?;
    if clips.is_empty() {
        bail!("no clips in {}", path.display());
    }
    Ok(clips)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn create_parent(file: &Path) -> Result<()> {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

/// A training output directory or a checkpoint file.
fn load_generator(model: &Path) -> Result<(Generator, String)> {
    let path = if model.is_dir() {
        model.join("generator.ckpt")
    } else {
        model.to_path_buf()
    };
    let path = existing(&path, "generator checkpoint")?;
    let ck = Checkpoint::load(&path)?;
    let gen =
        Generator::from_checkpoint(&ck).with_context(|| format!("loading {}", path.display()))?;
    Ok((gen, ck.config_hash))
}

fn with_b(clip: &InteractionClip, b: Motion, source: &str) -> InteractionClip {
    InteractionClip {
        motion_b: b,
        source: source.into(),
        ..clip.clone()
    }
}

fn pick(clips: Vec<InteractionClip>, index: usize) -> Result<InteractionClip> {
    let n = clips.len();
    clips
        .into_iter()
        .nth(index)
        .ok_or_else(|| usage(format!("--index {index} out of range for {n} clips")))
}

pub fn import_sbu(file: &FileConfig, a: ImportSbuArgs) -> Result<()> {
    let root = a
        .root
        .or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
        .ok_or_else(|| usage(format!("--root not given and {DATA_ENV} is not set")))?;
    let root = existing(&root, "dataset root")?;
    let mut opts = file.resolve("import", &ImportSection::default(), &[])?;
    opts.window = a.window.unwrap_or(opts.window);
    opts.stride = a.stride.unwrap_or(opts.stride);
    opts.normalize &= !a.no_normalize;
    if opts.window == 0 || opts.stride == 0 {
        return Err(usage("window and stride must be positive"));
    }

    let mut clips = import_sbu_dir(&root, &SbuImportOptions::default())?;
    let takes = clips.len();
    if opts.normalize {
        clips = clips
            .iter()
            .map(|c| normalize_interaction(c).map(|(n, _)| n))
            .collect::<reactmotion::Result<_>>()?;
    }
    let windows = window_all(&clips, opts.window, opts.stride)?;
    let record = RunRecord::new("import-sbu")
        .path("root", &root)
        .section("import", &opts)?;
    create_dir(&a.out)?;
    let hash = record.write(&record_in(&a.out))?;
    write_dataset(&a.out, "sbu", &windows, Some(&hash))?;
    println!("{takes} takes, {} windows", windows.len());
    Ok(())
}

pub fn synth_data(file: &FileConfig, a: SynthDataArgs) -> Result<()> {
    let mut s = file.resolve(
        "synthetic",
        &SynthSection {
            seed: 0,
            spec: SyntheticSpec::default(),
        },
        &[],
    )?;
    s.seed = a.seed.unwrap_or(s.seed);
    s.spec.classes = a.classes.unwrap_or(s.spec.classes);
    s.spec.clips_per_class = a.clips.unwrap_or(s.spec.clips_per_class);
    s.spec.length = a.len.unwrap_or(s.spec.length);
    s.spec.noise = a.noise.unwrap_or(s.spec.noise);
    let clips = make_synthetic_dataset(&s.spec, s.seed).map_err(|e| usage(e.to_string()))?;
    let record = RunRecord::new("synth-data").section("synthetic", &s)?;
    create_dir(&a.out)?;
    let hash = record.write(&record_in(&a.out))?;
    write_dataset(&a.out, "synthetic", &clips, Some(&hash))?;
    println!("{} clips", clips.len());
    Ok(())
}

fn train_config(file: &FileConfig, f: &TrainFlags) -> Result<TrainConfig> {
    let preset = f
        .preset
        .clone()
        .or_else(|| {
            file.section("train")
                .and_then(|t| t.get("dataset"))
                .and_then(|v| v.as_str())
                .map(String::from)
        })
        .unwrap_or_else(|| "sbu".into());
    let base = TrainConfig::preset(&preset).map_err(|e| usage(e.to_string()))?;
    let mut c = file.resolve("train", &base, &["skl_ref"])?;
    if f.preset.is_some() {
        c.dataset = preset;
    }
    if let Some(h) = f.h_part {
        c = c.with_part_width(h);
    }
    c.epochs = f.epochs.unwrap_or(c.epochs);
    c.batch_size = f.batch_size.unwrap_or(c.batch_size);
    c.learning_rate = f.lr.unwrap_or(c.learning_rate);
    c.seed = f.seed.unwrap_or(c.seed);
    c.h_disc = f.h_disc.unwrap_or(c.h_disc);
    c.num_classes = f.num_classes.unwrap_or(c.num_classes);
    c.disable_attention |= f.no_attention;
    c.disable_part_encoding |= f.no_parts;
    c.disable_multiclass |= f.no_multiclass;
    if let Some(s) = f.loss_subset {
        c.loss_subset = match s {
            Subset::Adv => LossSubset::Adv,
            Subset::AdvSkl => LossSubset::AdvSkl,
            Subset::AdvSklCon => LossSubset::AdvSklCon,
            Subset::Full => LossSubset::Full,
        };
    }
    c.validate().map_err(|e| usage(e.to_string()))?;
    Ok(c)
}

fn recognizer_config(file: &FileConfig, f: &RecognizerFlags) -> Result<RecognizerConfig> {
    let mut c = file.resolve("recognizer", &RecognizerConfig::default(), &[])?;
    c.hidden = f.rec_hidden.unwrap_or(c.hidden);
    c.epochs = f.rec_epochs.unwrap_or(c.epochs);
    c.seed = f.rec_seed.unwrap_or(c.seed);
    if f.b_only {
        c.input = RecognizerInput::BOnly;
    }
    if c.hidden == 0 || c.batch_size == 0 {
        return Err(usage(
            "recognizer hidden width and batch size must be positive",
        ));
    }
    Ok(c)
}

pub fn train(file: &FileConfig, a: TrainArgs) -> Result<()> {
    let config = train_config(file, &a.flags)?;
    let clips = load_clips(&a.data, "training data")?;
    let clips = match a.holdout {
        Some(s) => split_loso(&clips, s)?.train,
        None => clips,
    };
    let mut record = RunRecord::new("train")
        .path("data", &a.data)
        .section("train", &config)?;
    if let Some(s) = a.holdout {
        record = record.param("holdout", s as i64);
    }
    let record = record.param("train_config_hash", config.hash());
    create_dir(&a.out)?;
    record.write(&record_in(&a.out))?;

    let every = (config.epochs / 20).max(1);
    let out = train_gan_with(&clips, &config, |r| {
        if r.epoch % every == 0 || r.epoch == config.epochs {
            eprintln!(
                "epoch {:>5}  L1 {:.6}  sup {:.4}  unsup {:.4}  D {:.4}  G {:.4}",
                r.epoch, r.loss_l1, r.loss_sup, r.loss_unsup, r.d_objective, r.g_objective
            );
        }
    })?;
    let hash = config.hash();
    out.generator
        .to_checkpoint(&hash)?
        .save(a.out.join("generator.ckpt"))?;
    out.discriminator
        .to_checkpoint(&hash)?
        .save(a.out.join("discriminator.ckpt"))?;
    std::fs::write(a.out.join("train_log.jsonl"), out.log.to_jsonl())?;
    let timing = serde_json::json!({
        "epoch_seconds": out.epoch_seconds,
        "total_seconds": out.epoch_seconds.iter().sum::<f64>(),
    });
    std::fs::write(
        a.out.join("timing.json"),
        serde_json::to_string_pretty(&timing)?,
    )?;
    println!("trained {} epochs on {} clips", config.epochs, clips.len());
    Ok(())
}

pub fn synthesize(a: SynthesizeArgs) -> Result<()> {
    let (gen, model_hash) = load_generator(&a.model)?;
    let clips = load_clips(&a.data, "data")?;
    let clips = match a.holdout {
        Some(s) => split_loso(&clips, s)?.test,
        None => clips,
    };
    let preds = synthesize_all(&gen, &clips)?;
    let out: Vec<InteractionClip> = clips
        .iter()
        .zip(preds)
        .map(|(c, b)| with_b(c, b, "synthesized"))
        .collect();
    let mut record = RunRecord::new("synthesize")
        .path("model", &a.model)
        .path("data", &a.data)
        .param("model_config_hash", model_hash);
    if let Some(s) = a.holdout {
        record = record.param("holdout", s as i64);
    }
    create_dir(&a.out)?;
    let hash = record.write(&record_in(&a.out))?;
    write_dataset(&a.out, "synth", &out, Some(&hash))?;
    println!("{} clips", out.len());
    Ok(())
}

/// Pairs every predicted clip with the first unused ground-truth clip that
/// has the same A motion, label and subjects.
fn match_truth(
    pred: &[InteractionClip],
    truth: &[InteractionClip],
) -> Result<Vec<InteractionClip>> {
    let mut used = vec![false; truth.len()];
    pred.iter()
        .enumerate()
        .map(|(i, p)| {
            let j = (0..truth.len())
                .find(|&j| {
                    !used[j]
                        && truth[j].label == p.label
                        && truth[j].subjects == p.subjects
                        && truth[j].motion_a == p.motion_a
                })
                .ok_or_else(|| anyhow!("predicted clip {i} has no ground-truth clip with the same A, label and subjects"))?;
            used[j] = true;
            Ok(truth[j].clone())
        })
        .collect()
}

fn class_names(clips: &[InteractionClip]) -> BTreeMap<usize, String> {
    let mut names = BTreeMap::new();
    for c in clips {
        names.entry(c.label).or_insert_with(|| c.class_name.clone());
    }
    names
}

pub fn eval_afd(a: EvalAfdArgs) -> Result<()> {
    let pred = load_clips(&a.pred, "prediction")?;
    let truth = load_clips(&a.truth, "ground truth")?;
    let truth = match_truth(&pred, &truth)?;
    let preds: Vec<Motion> = pred.into_iter().map(|c| c.motion_b).collect();
    let afds = afd_all(&preds, &truth, a.per_joint)?;
    let mean = afds.iter().sum::<f64>() / afds.len() as f64;
    println!("{mean:?}");
    if a.by_class {
        let names = class_names(&truth);
        for (label, v) in mean_by_class(&afds, &truth) {
            println!("class {label} {} {v:?}", names[&label]);
        }
    }
    Ok(())
}

pub fn eval_recognition(file: &FileConfig, a: EvalRecognitionArgs) -> Result<()> {
    let config = recognizer_config(file, &a.rec)?;
    let train = load_clips(&a.train, "training data")?;
    let test = load_clips(&a.test, "test data")?;
    let record = RunRecord::new("eval-recognition")
        .path("train", &a.train)
        .path("test", &a.test)
        .section("recognizer", &config)?;
    eprintln!("config_hash {}", record.hash());
    let rec = train_recognizer(&train, &config)?;
    let samples: Vec<(&Motion, &Motion, usize)> = test
        .iter()
        .map(|c| (&c.motion_a, &c.motion_b, c.label))
        .collect();
    let report = recognition_accuracy(&rec, &samples)?;
    println!("{:?}", report.overall());
    let names = class_names(&test);
    for (label, (correct, total)) in &report.per_class {
        println!("class {label} {} {correct}/{total}", names[label]);
    }
    Ok(())
}

pub fn baseline_nn(a: BaselineNnArgs) -> Result<()> {
    let train = load_clips(&a.train, "training data")?;
    let query = load_clips(&a.query, "query data")?;
    let motions: Vec<&Motion> = query.iter().map(|c| &c.motion_a).collect();
    let preds = nn_baseline_batch(&train, &motions)?;
    let out: Vec<InteractionClip> = query
        .iter()
        .zip(preds)
        .map(|(c, b)| with_b(c, b, "nn_baseline"))
        .collect();
    let record = RunRecord::new("baseline-nn")
        .path("train", &a.train)
        .path("query", &a.query);
    create_dir(&a.out)?;
    let hash = record.write(&record_in(&a.out))?;
    write_dataset(&a.out, "nn", &out, Some(&hash))?;
    println!("{} clips", out.len());
    Ok(())
}

pub fn ablate(file: &FileConfig, a: AblateArgs) -> Result<()> {
    let config = train_config(file, &a.flags)?;
    let rec_config = a
        .recognizer
        .then(|| recognizer_config(file, &a.rec))
        .transpose()?;
    let clips = load_clips(&a.data, "data")?;
    let fold = split_loso(&clips, a.holdout)?;
    if fold.train.is_empty() {
        bail!(
            "every clip involves subject {}; the training fold is empty",
            a.holdout
        );
    }
    let variants = match a.kind {
        AblationKind::Generator => generator_variants(&config),
        AblationKind::Loss => loss_variants(&config),
    };
    let mut record = RunRecord::new("ablate")
        .path("data", &a.data)
        .param("holdout", a.holdout as i64)
        .param(
            "kind",
            match a.kind {
                AblationKind::Generator => "generator",
                AblationKind::Loss => "loss",
            },
        )
        .section("train", &config)?;
    if let Some(rc) = &rec_config {
        record = record.section("recognizer", rc)?;
    }
    create_parent(&a.out)?;
    record.write(&record_beside(&a.out))?;

    let recognizer = rec_config
        .map(|rc| train_recognizer(&fold.train, &rc))
        .transpose()?;
    let report = run_ablation(
        &fold.train,
        &fold.test,
        &variants,
        config.seed,
        recognizer.as_ref().map(|r| r as &dyn Classifier),
    )?;
    let tsv = report.to_tsv();
    std::fs::write(&a.out, &tsv).with_context(|| format!("writing {}", a.out.display()))?;
    print!("{tsv}");
    Ok(())
}

pub fn export_attention(a: ExportAttentionArgs) -> Result<()> {
    let (gen, model_hash) = load_generator(&a.model)?;
    let clip = pick(load_clips(&a.clip, "clip")?, a.index)?;
    let (_, map) = gen.synthesize(&clip.motion_a)?;
    let map = map.ok_or_else(|| anyhow!("the model was trained without attention"))?;
    create_parent(&a.out)?;
    std::fs::write(&a.out, map.to_text())
        .with_context(|| format!("writing {}", a.out.display()))?;
    RunRecord::new("export-attention")
        .path("model", &a.model)
        .path("clip", &a.clip)
        .param("index", a.index as i64)
        .param("model_config_hash", model_hash)
        .write(&record_beside(&a.out))?;
    Ok(())
}

fn write_table(path: &Path, clip: &InteractionClip) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let mut header = vec!["frame".to_string()];
    for who in ["a", "b"] {
        for j in Joint::ALL {
            for axis in ["x", "y", "z"] {
                header.push(format!("{who}_{}_{axis}", j.name()));
            }
        }
    }
    w.write_record(&header)?;
    for (t, (pa, pb)) in clip.motion_a.iter().zip(&clip.motion_b).enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(
            pa.as_slice()
                .iter()
                .chain(pb.as_slice())
                .map(|v| v.to_string()),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_motion(a: ExportMotionArgs) -> Result<()> {
    let mut clip = pick(load_clips(&a.clip, "clip")?, a.index)?;
    let mut record = RunRecord::new("export-motion")
        .path("clip", &a.clip)
        .param("index", a.index as i64);
    if let Some(model) = &a.model {
        let (gen, model_hash) = load_generator(model)?;
        let (b, _) = gen.synthesize(&clip.motion_a)?;
        clip = with_b(&clip, b, "synthesized");
        record = record
            .path("model", model)
            .param("model_config_hash", model_hash);
    }
    create_parent(&a.out)?;
    let hash = record.write(&record_beside(&a.out))?;
    write_clip(&a.out, &clip, Some(&hash))?;
    if let Some(table) = &a.table {
        create_parent(table)?;
        write_table(table, &clip)?;
    }
    Ok(())
}

pub fn grad_check(a: GradCheckArgs) -> Result<()> {
    if a.samples == Some(0) {
        return Err(usage("--samples must be positive"));
    }
    let report = pipeline_grad_check(a.seed, a.samples)?;
    println!("max_rel_error {:e}", report.max_rel_error);
    println!("entries_checked {}", report.entries_checked);
    if let Some((name, index)) = &report.worst {
        println!("worst {name}[{index}]");
    }
    if !report.passed {
        bail!(
            "gradient check failed: max relative error {:e}",
            report.max_rel_error
        );
    }
    Ok(())
}
