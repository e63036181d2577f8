#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "eegrt/cli.hpp"
#include "eegrt/error.hpp"
#include "eegrt/pipeline.hpp"
#include "eegrt/scoring.hpp"
#include "eegrt/synth.hpp"
#include "test_util.hpp"

using namespace eegrt;

namespace {

const std::filesystem::path kDataDir = EEGRT_DATA_DIR;

PipelineConfig small_config(const TempDir& tmp) {
    PipelineConfig cfg;
    cfg.montage_path = (kDataDir / "montage_tcp.txt").string();
    cfg.target_hz = 50.0;
    cfg.window_samples = 128;
    cfg.stride_samples = 50;
    cfg.image_size = 32;
    cfg.postproc = {0.6, 0.0, 0.0};
    cfg.seed = 5;
    (void)tmp;
    return cfg;
}

std::unique_ptr<MiniResNet> tiny_model(std::uint64_t seed, int input_size) {
    MiniResNetConfig mcfg;
    mcfg.input_size = input_size;
    mcfg.stem_channels = 2;
    mcfg.layer_widths = {2, 3, 4, 5};
    mcfg.seed = seed;
    return build_mini_resnet(mcfg);
}

}  // namespace

TEST_CASE("config file parsing, overrides, and unknown keys") {
    TempDir tmp("config");
    {
        std::ofstream out(tmp.path("p.cfg"));
        out << "# pipeline settings\n"
            << "montage_path = /tmp/m.txt\n"
            << "target_hz = 50\n"
            << "window_sec = 6.0\n"
            << "window_samples = 256\n"
            << "stride_samples = 50\n"
            << "image_size = 256\n"
            << "model_path = /tmp/m.mrsn\n"
            << "s_th = 0.7   # threshold\n"
            << "bd_min_sec = 1.5\n"
            << "sd_min_sec = 2.5\n"
            << "seed = 42\n";
    }
    PipelineConfig cfg = load_config(tmp.path("p.cfg"));
    CHECK(cfg.montage_path == "/tmp/m.txt");
    CHECK(cfg.target_hz == doctest::Approx(50.0));
    CHECK(cfg.postproc.s_th == doctest::Approx(0.7));
    CHECK(cfg.postproc.bd_min_sec == doctest::Approx(1.5));
    CHECK(cfg.postproc.sd_min_sec == doctest::Approx(2.5));
    CHECK(cfg.seed == 42);

    set_config_value(cfg, "s_th", "0.25");
    CHECK(cfg.postproc.s_th == doctest::Approx(0.25));
    CHECK_THROWS_AS(set_config_value(cfg, "nope", "1"), Error);

    {
        std::ofstream out(tmp.path("bad.cfg"));
        out << "target_hz 50\n";
    }
    CHECK_THROWS_AS(load_config(tmp.path("bad.cfg")), Error);
}

TEST_CASE("synthetic generator: structure, reference, determinism") {
    SynthParams p;
    p.duration_sec = 120.0;
    p.n_seizures = 3;
    p.seiz_min_sec = 8.0;
    p.seiz_max_sec = 12.0;
    p.min_gap_sec = 10.0;
    p.seed = 9;
    const SynthResult a = generate_synthetic(p);
    const SynthResult b = generate_synthetic(p);
    CHECK(a.recording.channels.size() == 19);
    CHECK(a.recording.sample_count() == 30000);
    CHECK(a.recording.channels[0].name == "FP1");
    a.reference.validate();
    int seiz = 0;
    for (const auto& e : a.reference.events) seiz += e.label == Label::seiz;
    CHECK(seiz == 3);
    CHECK(a.reference.total_dur_ms == 120000);

    CHECK(a.recording.channels[3].samples == b.recording.channels[3].samples);
    CHECK(a.reference == b.reference);

    p.seed = 10;
    const SynthResult c = generate_synthetic(p);
    CHECK(a.recording.channels[0].samples != c.recording.channels[0].samples);

    SynthParams overfull;
    overfull.duration_sec = 60.0;
    overfull.n_seizures = 10;
    CHECK_THROWS_AS(generate_synthetic(overfull), Error);
}

TEST_CASE("synthetic bursts are visibly larger than background") {
    SynthParams p;
    p.duration_sec = 100.0;
    p.n_seizures = 2;
    p.seiz_min_sec = 8.0;
    p.seiz_max_sec = 12.0;
    p.min_gap_sec = 10.0;
    p.seed = 4;
    const SynthResult r = generate_synthetic(p);
    const Event* burst = nullptr;
    for (const auto& e : r.reference.events)
        if (e.label == Label::seiz) { burst = &e; break; }
    REQUIRE(burst);
    const auto& s = r.recording.channels[0].samples;
    const auto rms = [&](double a, double b) {
        const std::size_t i0 = static_cast<std::size_t>(a * p.rate_hz), i1 = static_cast<std::size_t>(b * p.rate_hz);
        double acc = 0.0;
        for (std::size_t i = i0; i < i1; ++i) acc += s[i] * s[i];
        return std::sqrt(acc / static_cast<double>(i1 - i0));
    };
    const double mid = 0.5 * (burst->start_sec() + burst->stop_sec());
    CHECK(rms(mid - 2.0, mid + 2.0) > 2.0 * rms(0.0, burst->start_sec()));
}

TEST_CASE("preprocess: window count, image geometry, latency components") {
    TempDir tmp("prep");
    SynthParams sp;
    sp.duration_sec = 60.0;
    sp.n_seizures = 1;
    sp.seiz_min_sec = 8.0;
    sp.seiz_max_sec = 12.0;
    sp.min_gap_sec = 10.0;
    sp.seed = 2;
    const SynthResult synth = generate_synthetic(sp);
    const PipelineConfig cfg = small_config(tmp);
    const MontageSpec montage = MontageSpec::load(cfg.montage_path);

    const PreprocessResult pre = preprocess_recording(synth.recording, montage, cfg);
    // 60 s at 50 Hz = 3000 samples; window 128 stride 50
    const std::size_t expected = (3000 - 128) / 50 + 1;
    CHECK(pre.images.size() == expected);
    CHECK(pre.images[0].height == 32);
    CHECK(pre.images[0].width == 32);
    CHECK(pre.stride_sec == doctest::Approx(1.0));
    CHECK(pre.montage_channels == 20);
    CHECK(pre.fir_group_delay_sec > 0.0);
    CHECK(pre.scaling_lookahead_sec == doctest::Approx(3.0));
    CHECK(pre.window_span_sec == doctest::Approx(128.0 / 50.0));
    CHECK(pre.images[1].start_sec == doctest::Approx(1.0));
}

TEST_CASE("quiescent input with a sub-threshold model yields one background event") {
    TempDir tmp("quiet");
    RawRecording rec;
    rec.sample_rate_hz = 250.0;
    for (const auto& name : standard_channel_names())
        rec.channels.push_back({name, std::vector<double>(250 * 30, 0.0)});

    PipelineConfig cfg = small_config(tmp);
    cfg.postproc.s_th = 0.6;  // zeroed head emits exactly 0.5
    const MontageSpec montage = MontageSpec::load(cfg.montage_path);
    auto model = tiny_model(1, cfg.image_size);
    std::fill(model->head().weight.begin(), model->head().weight.end(), 0.0);
    std::fill(model->head().bias.begin(), model->head().bias.end(), 0.0);

    const RunResult res = run_pipeline(rec, montage, *model, cfg);
    REQUIRE(res.hypothesis.events.size() == 1);
    CHECK(res.hypothesis.events[0].label == Label::bckg);
    CHECK(res.hypothesis.total_dur_ms == 30000);  // extended to the recording duration
}

TEST_CASE("run_pipeline streaming output equals an offline rerun") {
    TempDir tmp("rerun");
    SynthParams sp;
    sp.duration_sec = 90.0;
    sp.n_seizures = 2;
    sp.seiz_min_sec = 8.0;
    sp.seiz_max_sec = 12.0;
    sp.min_gap_sec = 10.0;
    sp.seed = 33;
    const SynthResult synth = generate_synthetic(sp);
    PipelineConfig cfg = small_config(tmp);
    cfg.postproc = {0.45, 2.0, 3.0};
    const MontageSpec montage = MontageSpec::load(cfg.montage_path);
    auto model = tiny_model(3, cfg.image_size);

    const RunResult res = run_pipeline(synth.recording, montage, *model, cfg);
    EventList offline = postprocess(res.posteriors, cfg.postproc);
    if (!offline.events.empty() && res.hypothesis.total_dur_ms > offline.total_dur_ms) {
        offline.events.back().stop_ms = res.hypothesis.total_dur_ms;
        offline.total_dur_ms = res.hypothesis.total_dur_ms;
    }
    CHECK(res.hypothesis == offline);

    // determinism of the whole pass
    const RunResult res2 = run_pipeline(synth.recording, montage, *model, cfg);
    CHECK(res2.hypothesis == res.hypothesis);
    REQUIRE(res2.posteriors.entries.size() == res.posteriors.entries.size());
    for (std::size_t i = 0; i < res.posteriors.entries.size(); ++i)
        CHECK(res2.posteriors.entries[i].p_seiz == res.posteriors.entries[i].p_seiz);
}

TEST_CASE("posterior stream save/load round trip") {
    TempDir tmp("post");
    PosteriorSequence ps;
    ps.stride_sec = 0.5;
    for (int i = 0; i < 20; ++i) ps.entries.push_back({i * 0.5, 0.05 * i});
    ps.save(tmp.path("p.csv"));
    const PosteriorSequence back = PosteriorSequence::load(tmp.path("p.csv"));
    REQUIRE(back.entries.size() == ps.entries.size());
    CHECK(back.stride_sec == doctest::Approx(0.5));
    for (std::size_t i = 0; i < ps.entries.size(); ++i) {
        CHECK(back.entries[i].start_sec == doctest::Approx(ps.entries[i].start_sec));
        CHECK(back.entries[i].p_seiz == doctest::Approx(ps.entries[i].p_seiz).epsilon(1e-8));
    }
}

TEST_CASE("bench: component accounting and scaling") {
    TempDir tmp("bench");
    PipelineConfig cfg = small_config(tmp);
    cfg.postproc = {0.5, 0.0, 0.0};
    const MontageSpec montage = MontageSpec::load(cfg.montage_path);
    auto model = tiny_model(7, cfg.image_size);

    SynthParams sp;
    sp.duration_sec = 40.0;
    sp.n_seizures = 1;
    sp.seiz_min_sec = 8.0;
    sp.seiz_max_sec = 12.0;
    sp.min_gap_sec = 6.0;
    sp.seed = 6;
    const SynthResult a = generate_synthetic(sp);
    const BenchReport r = run_bench(a.recording, montage, *model, cfg);

    CHECK(r.signal_sec == doctest::Approx(40.0));
    CHECK(r.xrt > 0.0);
    CHECK(r.postproc_delay_sec == 0.0);
    CHECK(r.fir_group_delay_sec > 0.0);
    CHECK(r.scaling_lookahead_sec == doctest::Approx(cfg.window_sec / 2));
    CHECK(r.total_latency_sec ==
          doctest::Approx(r.fir_group_delay_sec + r.scaling_lookahead_sec + r.window_span_sec +
                          r.postproc_delay_sec + r.per_window_latency_ms / 1000.0));
    const double stage_sum = r.stages.montage_sec + r.stages.decimate_sec + r.stages.scale_sec +
                             r.stages.window_image_sec + r.stages.infer_sec + r.stages.postproc_sec;
    CHECK(r.processing_sec == doctest::Approx(stage_sum));
    CHECK(r.peak_memory_mb > 0.0);

    // doubling the signal roughly doubles the work
    sp.duration_sec = 80.0;
    sp.n_seizures = 2;
    const SynthResult b = generate_synthetic(sp);
    const BenchReport r2 = run_bench(b.recording, montage, *model, cfg);
    const double ratio = r2.processing_sec / r.processing_sec;
    INFO("processing ratio ", ratio);
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.4);

    // with morphology configured, the reported delay follows the parameters
    cfg.postproc = {0.5, 2.0, 3.0};
    const BenchReport r3 = run_bench(a.recording, montage, *model, cfg);
    CHECK(r3.postproc_delay_sec == doctest::Approx(5.0));
}

TEST_CASE("cmd_score writes a two-metric report from annotation files") {
    TempDir tmp("cmdscore");
    std::vector<Event> events = {make_event(0, 20, Label::bckg, 0.1), make_event(20, 30, Label::seiz, 0.9),
                                 make_event(30, 60, Label::bckg, 0.1)};
    const EventList ref = normalize_events(std::move(events), 60000);
    ref.save(tmp.path("ref.tsv"));
    ref.save(tmp.path("hyp.tsv"));

    cli::ScoreArgs args;
    args.ref_path = tmp.path("ref.tsv").string();
    args.hyp_path = tmp.path("hyp.tsv").string();
    args.out_csv = tmp.path("report.csv").string();
    CHECK(cli::cmd_score(args) == 0);

    std::ifstream in(tmp.path("report.csv"));
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    CHECK(header.rfind("metric,", 0) == 0);
    CHECK(row1.rfind("ovlp,100.0000,100.0000,0.0000", 0) == 0);
    CHECK(row2.rfind("epoch,100.0000,100.0000,0.0000", 0) == 0);
}

TEST_CASE("parse_grid accepts bd:sd lists and rejects junk") {
    const auto grid = cli::parse_grid("0:0,1.5:2,3:4.5");
    REQUIRE(grid.size() == 3);
    CHECK(grid[1].first == doctest::Approx(1.5));
    CHECK(grid[2].second == doctest::Approx(4.5));
    CHECK_THROWS_AS(cli::parse_grid("1-2"), Error);
    CHECK_THROWS_AS(cli::parse_grid(""), Error);
}

TEST_CASE("cmd_synth then cmd_run produce a hypothesis file") {
    TempDir tmp("cmdrun");
    cli::SynthArgs sargs;
    sargs.out_base = tmp.path("rec").string();
    sargs.duration_sec = 120.0;
    sargs.n_seizures = 1;
    sargs.seed = 3;
    CHECK(cli::cmd_synth(sargs) == 0);
    CHECK(std::filesystem::exists(tmp.path("rec.eegr")));
    CHECK(std::filesystem::exists(tmp.path("rec.ref")));

    PipelineConfig cfg = small_config(tmp);
    auto model = tiny_model(1, cfg.image_size);
    save_model(*model, tmp.path("m.mrsn"));
    cfg.model_path = tmp.path("m.mrsn").string();

    cli::RunArgs rargs;
    rargs.config = cfg;
    rargs.input_path = tmp.path("rec.eegr").string();
    rargs.out_hyp_path = tmp.path("hyp.tsv").string();
    rargs.posteriors_out = tmp.path("post.csv").string();
    CHECK(cli::cmd_run(rargs) == 0);

    const EventList hyp = EventList::load(tmp.path("hyp.tsv"));
    CHECK(hyp.total_dur_ms == 120000);
    const PosteriorSequence post = PosteriorSequence::load(tmp.path("post.csv"));
    CHECK(!post.entries.empty());

    // file-level sweep over the stored posteriors
    cli::SweepArgs swargs;
    swargs.posteriors_path = tmp.path("post.csv").string();
    swargs.ref_path = tmp.path("rec.ref").string();
    swargs.s_th = 0.5;
    swargs.grid = "0:0,1:1";
    swargs.out_csv = tmp.path("sweep.csv").string();
    CHECK(cli::cmd_sweep(swargs) == 0);
    std::ifstream in(tmp.path("sweep.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "delay_sec,sensitivity_pct,fa_per_24h");
}

namespace {

int cli_exit(const std::string& args) {
    const std::string cmd = std::string(EEGRT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("binary exit codes: 0 ok, 1 usage, 2 data") {
    TempDir tmp("exitcodes");
    CHECK(cli_exit("--help") == 0);
    CHECK(cli_exit("score --help") == 0);
    CHECK(cli_exit("definitely-not-a-command") == 1);
    CHECK(cli_exit("run --out x.tsv") == 1);  // missing required --input
    // data errors: nonexistent files
    CHECK(cli_exit("score --ref /nonexistent.ref --hyp /nonexistent.tsv") == 2);
    CHECK(cli_exit("run --config /nonexistent.cfg --input a --out b") == 2);
    // usage error: bad sweep grid
    const std::filesystem::path ref = tmp.path("r.ref");
    std::vector<Event> events = {make_event(0, 10, Label::bckg, 0.1)};
    normalize_events(std::move(events), 10000).save(ref);
    const std::filesystem::path post = tmp.path("p.csv");
    {
        PosteriorSequence ps;
        ps.stride_sec = 1.0;
        ps.entries.push_back({0.0, 0.5});
        ps.save(post);
    }
    CHECK(cli_exit("sweep --posteriors " + post.string() + " --ref " + ref.string() +
                   " --s-th-sweep 0.5 --grid junk") == 1);
}

TEST_CASE("pgm dump option writes one image per window") {
    TempDir tmp("pgmdump");
    SynthParams sp;
    sp.duration_sec = 20.0;
    sp.n_seizures = 1;
    sp.min_gap_sec = 4.0;
    sp.seiz_min_sec = 5.0;
    sp.seiz_max_sec = 8.0;
    sp.seed = 12;
    const SynthResult synth = generate_synthetic(sp);
    PipelineConfig cfg = small_config(tmp);
    const MontageSpec montage = MontageSpec::load(cfg.montage_path);
    auto model = tiny_model(2, cfg.image_size);
    const std::filesystem::path dir = tmp.path("imgs");
    std::filesystem::create_directories(dir);
    const RunResult res = run_pipeline(synth.recording, montage, *model, cfg, &dir);
    std::size_t count = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++count;
    CHECK(count == res.posteriors.entries.size());
}
