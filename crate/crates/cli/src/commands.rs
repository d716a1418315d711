use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use picyc_core::graph::{build_graph, load_graph, parse_manifest, save_graph, ColoredGraph};
use picyc_core::index::{
    build_index, load_index, save_index, shard_index, BranchingIndex, IndexShard,
};
use picyc_core::search::{
    load_cycles, merge_cycle_sets, parallel_search, save_cycles, CycleSet, SearchParams,
};
use picyc_core::testkit::{synth_genomes, write_synth, Assignment, PlantMode, SynthConfig};
use picyc_core::variant::{call_variants, save_fasta, save_variants, CallStats};

use crate::{
    AssignArg, BenchArgs, BuildArgs, CallArgs, Cli, CliError, Command, IndexArgs, MergeArgs,
    ModeArg, SearchArgs, SearchTuning, SynthArgs,
};

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build(a) => cmd_build(&a),
        Command::Index(a) => cmd_index(&a),
        Command::Search(a) => cmd_search(&a),
        Command::Call(a) => cmd_call(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::MergeCycles(a) => cmd_merge(&a),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "{what} {} does not exist",
            path.display()
        )))
    }
}

fn cmd_build(a: &BuildArgs) -> Result<(), CliError> {
    require_file(&a.manifest, "manifest")?;
    let colors = parse_manifest(&a.manifest)?;
    let g = build_graph(&colors, a.k, a.threads.get())?;
    save_graph(&g, &a.out)?;
    eprintln!(
        "graph: k={} C={} nodes={} edges={} fingerprint={:#018x}",
        g.k(),
        g.num_colors(),
        g.len(),
        g.num_edges(),
        g.fingerprint()
    );
    for (name, mass) in g.colors().iter().zip(g.color_mass()) {
        eprintln!("color {name}: kmer_mass={mass}");
    }
    Ok(())
}

fn cmd_index(a: &IndexArgs) -> Result<(), CliError> {
    require_file(&a.graph, "graph")?;
    let g = load_graph(&a.graph)?;
    let idx = build_index(&g, a.threads.get());
    save_index(&idx, g.k(), &a.out)?;
    eprintln!("index: entries={} nodes={}", idx.len(), g.len());
    Ok(())
}

fn load_pair(graph: &Path, index: &Path) -> Result<(ColoredGraph, BranchingIndex), CliError> {
    require_file(graph, "graph")?;
    require_file(index, "index")?;
    let g = load_graph(graph)?;
    let idx = load_index(index, &g)?;
    Ok((g, idx))
}

fn search_params(
    k: usize,
    t: &SearchTuning,
    workers: usize,
    budget: Option<f64>,
) -> Result<SearchParams, CliError> {
    let budget = match budget {
        Some(s) if !(s.is_finite() && s > 0.0) => {
            return Err(CliError::Input(format!("budget must be positive, got {s}")))
        }
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    let mut p = SearchParams::new(k)
        .with_n_range(t.nmin, t.nmax.unwrap_or(k))
        .with_vmax(t.vmax)
        .with_workers(workers)
        .with_budget(budget);
    p.fraction = t.fraction;
    p.select_mode = t.select.into();
    p.validate()?;
    Ok(p)
}

fn shard_of(idx: &BranchingIndex, t: &SearchTuning) -> Result<IndexShard, CliError> {
    Ok(shard_index(idx, t.shard.id, t.shard.count)?)
}

fn cmd_search(a: &SearchArgs) -> Result<(), CliError> {
    let (g, idx) = load_pair(&a.graph, &a.index)?;
    let params = search_params(g.k(), &a.tuning, a.threads.get(), a.budget_seconds)?;
    let shard = shard_of(&idx, &a.tuning)?;
    let res = parallel_search(&g, &shard, &params)?;
    if res.stats.guard_violations != 0 {
        return Err(CliError::Internal(format!(
            "{} subgraphs entered search without passing the size/branching guard",
            res.stats.guard_violations
        )));
    }
    save_cycles(&CycleSet::from_result(g.k(), g.fingerprint(), &res), &a.out)?;
    let stats_path = a
        .stats
        .clone()
        .unwrap_or_else(|| suffixed(&a.out, ".stats.csv"));
    let f = File::create(&stats_path).map_err(io_err(&stats_path))?;
    res.stats
        .write_csv(BufWriter::new(f))
        .map_err(io_err(&stats_path))?;
    eprintln!("search: {}", res.stats.report());
    Ok(())
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// The call summary line: Cyc, Fil, Pred, SubG, Index, then extra counts.
pub fn summary_line(stats: &CallStats, cycles: &CycleSet) -> String {
    format!(
        "Cyc={} Fil={} Pred={} SubG={} Index={} bubbles={} pred_bubbles={} indel_or_unresolved={}",
        stats.cycles,
        stats.filtered,
        stats.predicted_snps,
        cycles.subgraphs,
        cycles.index_size,
        stats.bubbles,
        stats.predicted_bubbles,
        stats.indel_or_unresolved
    )
}

fn cmd_call(a: &CallArgs) -> Result<(), CliError> {
    require_file(&a.graph, "graph")?;
    require_file(&a.cycles, "cycles file")?;
    if a.cmin == 0 {
        return Err(CliError::Input("--cmin must be >= 1".into()));
    }
    let g = load_graph(&a.graph)?;
    let cycles = load_cycles(&a.cycles)?;
    if cycles.fingerprint != g.fingerprint() || cycles.k != g.k() {
        return Err(CliError::Mismatch(format!(
            "cycles file belongs to graph {:#018x} (k={}), not {:#018x} (k={})",
            cycles.fingerprint,
            cycles.k,
            g.fingerprint(),
            g.k()
        )));
    }
    let out = call_variants(&cycles.cycles, &g, a.f, a.cmin)?;
    save_fasta(&out.bubbles, &suffixed(&a.out, ".fa"))?;
    save_variants(&out.calls, g.colors(), &suffixed(&a.out, ".variants.tsv"))?;
    println!("{}", summary_line(&out.stats, &cycles));
    Ok(())
}

pub const BENCH_HEADER: &str = "workers,cycles,entries_consumed,elapsed_s";

fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let (g, idx) = load_pair(&a.graph, &a.index)?;
    let shard = shard_of(&idx, &a.tuning)?;
    if a.workers.is_empty() || a.workers.contains(&0) {
        return Err(CliError::Input("worker counts must be >= 1".into()));
    }
    let mut rows = vec![BENCH_HEADER.to_string()];
    for &w in &a.workers {
        let params = search_params(g.k(), &a.tuning, w, Some(a.budget_seconds))?;
        let res = parallel_search(&g, &shard, &params)?;
        rows.push(format!(
            "{},{},{},{:.3}",
            w,
            res.stats.cycles,
            res.stats.used_index,
            res.stats.elapsed.as_secs_f64()
        ));
        eprintln!("bench: {}", res.stats.report());
    }
    let text = rows.join("\n") + "\n";
    match &a.out {
        Some(p) => std::fs::write(p, text).map_err(io_err(p))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::Input(e.to_string()))?;
        }
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<(), CliError> {
    let mut cfg = SynthConfig::new(a.seed, a.length, a.colors, a.snps, a.k);
    cfg.mode = match a.mode {
        ModeArg::Isolated => PlantMode::Isolated,
        ModeArg::Clustered => PlantMode::Clustered { gap: a.gap },
        ModeArg::Random => PlantMode::Random,
    };
    cfg.assignment = match a.assignment {
        AssignArg::Split => Assignment::Split,
        AssignArg::Private => Assignment::Private,
    };
    cfg.read_len = a.read_len;
    cfg.depth = a.depth;
    cfg.error_rate = a.error_rate;
    let data = synth_genomes(&cfg)?;
    let files = write_synth(&data, &a.out)?;
    eprintln!(
        "synth: colors={} variants={} manifest={} truth={}",
        a.colors,
        data.truth.variants.len(),
        files.manifest.display(),
        files.truth.display()
    );
    Ok(())
}

fn cmd_merge(a: &MergeArgs) -> Result<(), CliError> {
    let mut sets = Vec::with_capacity(a.inputs.len());
    for p in &a.inputs {
        require_file(p, "cycles file")?;
        sets.push(load_cycles(p)?);
    }
    let merged = merge_cycle_sets(&sets)?;
    save_cycles(&merged, &a.out)?;
    eprintln!(
        "merge: inputs={} cycles={}",
        sets.len(),
        merged.cycles.len()
    );
    Ok(())
}
