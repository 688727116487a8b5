#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nmrbell/bell.hpp"
#include "nmrbell/circuits.hpp"
#include "nmrbell/entanglement.hpp"
#include "nmrbell/errors.hpp"
#include "nmrbell/nmr.hpp"
#include "nmrbell/noise.hpp"
#include "nmrbell/qstate.hpp"
#include "nmrbell/tomography.hpp"

namespace nmrbell::pipeline {

using qstate::DensityMatrix;
using qstate::StateVector;

enum class Source { Circuit, Pulse, File };

struct PpsOptions {
    bool enabled = false;
    double epsilon = 1e-5;
    // Analyze the renormalized deviation part (standard NMR practice) rather
    // than the literal mixture.
    bool analyze_core = true;
};

struct NoiseOptions {
    bool enabled = false;
    noise::Channel::Kind kind = noise::Channel::Kind::Depolarizing;
    double p = 0.0;
    std::array<double, 3> q{0.0, 0.0, 0.0};

    noise::Channel channel() const;
};

struct TomographyOptions {
    bool enabled = false;
    double sigma = 0.0;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> settings;  // empty = canonical seven
};

struct SweepOptions {
    bool enabled = false;
    int party = 0;  // 0 = A
    int index = 1;
    int points = 181;  // theta from 0 to pi inclusive
};

struct AnalysisOptions {
    entanglement::NegativityConvention negativity =
        entanglement::NegativityConvention::Doubled;
    noise::FidelityConvention fidelity = noise::FidelityConvention::Uhlmann;
};

struct PipelineConfig {
    Source source = Source::Circuit;
    std::string state_file;
    PpsOptions pps;
    NoiseOptions noise;
    TomographyOptions tomography;
    SweepOptions sweep;
    AnalysisOptions analysis;
    std::optional<std::uint64_t> seed;
};

// Strict parser: unknown keys anywhere are a FormatError.
PipelineConfig parse_pipeline_config(const std::string& text);

struct PipelineOutputs {
    nlohmann::ordered_json report;
    DensityMatrix analysis_state;
    std::vector<tomography::MeasurementRecord> records;
    std::vector<bell::SweepPoint> sweep;
};

// Runs source -> pseudopure -> noise -> tomography -> analysis and collects
// the report. Any stage failure is rethrown with the stage name prefixed.
PipelineOutputs run_pipeline(const PipelineConfig& cfg);

// Writes report.json, tomograph CSVs, records and sweep files into out_dir.
// format is "json" or "csv" and selects the report flavor; the matrix and
// curve side files are always CSV.
void write_outputs(const PipelineOutputs& out, const std::string& out_dir,
                   const std::string& format);

// Shared source loading for the stage subcommands. Returns the prepared
// density matrix and, when the source is pure, the core state.
struct LoadedSource {
    DensityMatrix state;
    std::optional<StateVector> core;
};
LoadedSource load_source(Source source, const std::string& state_file);

Source parse_source(const std::string& name);

}  // namespace nmrbell::pipeline
