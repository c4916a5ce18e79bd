#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "balayage/pipeline.hpp"

namespace balayage {

using ojson = nlohmann::ordered_json;

/// One plot-ready convergence table; fixed columns stage, id, value, stderr.
struct CsvTable {
  std::string name;  // file stem
  std::vector<std::array<std::string, 4>> rows;
};

/// Locale-independent shortest round-trip decimal.
std::string format_double(double v);

/// Sweep-monotonicity audit rows for one input/output pair (eligible
/// dictionary members only).
std::vector<MassGateRow> mass_gate(const WeightedMeasure& in, const WeightedMeasure& out,
                                   const Dictionary& dict, const KernelSpec& k,
                                   const DomainSpec& domain, const std::string& stage);

// Machine-readable fragments: stable key order, no timing or host data.
ojson estimate_json(const Estimate& e);
ojson diagnostics_json(const Diagnostics& d);
ojson delta_family_json(const DeltaFamilyReport& rep);
ojson gate_json(const std::vector<MassGateRow>& rows);
ojson shrink_json(const ShrinkSolution& sol);
ojson sweep_json(const WeightedMeasure& in, const WeightedMeasure& out, const BallUnion* stop,
                 const Dictionary* dict, const std::vector<MassGateRow>* gate);
ojson grid_ladder_json(const GridLadderReport& rep);
ojson theorem_json(const TheoremReport& rep);
ojson exit_mixture_json(const ExitMixtureReport& rep);
ojson jensen_json(const JensenReport& rep);
ojson skorokhod_json(const SkorokhodReport& rep);
ojson harnack_json(const HarnackReport& rep);

std::vector<CsvTable> sweep_tables(const WeightedMeasure& out, const BallUnion* stop,
                                   const Dictionary* dict);
std::vector<CsvTable> shrink_tables(const ShrinkSolution& sol);
std::vector<CsvTable> grid_ladder_tables(const GridLadderReport& rep);
std::vector<CsvTable> theorem_tables(const TheoremReport& rep);
std::vector<CsvTable> exit_mixture_tables(const ExitMixtureReport& rep);
std::vector<CsvTable> jensen_tables(const JensenReport& rep);
std::vector<CsvTable> skorokhod_tables(const SkorokhodReport& rep);
std::vector<CsvTable> harnack_tables(const HarnackReport& rep);

std::string sweep_summary(const WeightedMeasure& out);
std::string shrink_summary(const ShrinkSolution& sol);
std::string grid_ladder_summary(const GridLadderReport& rep);
std::string theorem_summary(const TheoremReport& rep);
std::string exit_mixture_summary(const ExitMixtureReport& rep);
std::string jensen_summary(const JensenReport& rep);
std::string skorokhod_summary(const SkorokhodReport& rep);
std::string harnack_summary(const HarnackReport& rep);

/// Writes report.json and the CSV tables per the format selector plus
/// summary.txt (always).  Only summary.txt may mention wall-clock time.
void write_report_files(const std::string& out_dir, const ojson& machine,
                        const std::vector<CsvTable>& tables, const std::string& summary,
                        const std::string& format);

}  // namespace balayage
