#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mll/fit.hpp"
#include "mll/loglinear.hpp"
#include "mll/mediation.hpp"
#include "mll/roles.hpp"
#include "mll/tables.hpp"

namespace mll {

/// Contents of a model-spec JSON document. Only `space` is mandatory.
struct ModelFile {
    FactorSpace space;
    std::optional<ModelSpec> model;
    std::optional<Roles> roles;
    std::optional<ThetaVector> theta;
    std::optional<Table> probabilities;
};

ModelFile parse_model_json(const std::string& text);
ModelFile load_model_file(const std::string& path);

/// Header: variable names then `count`; one row per cell; absent cells are 0.
/// With a space, header names must match its variables (any column order);
/// without one, level counts are inferred as max level + 1 (at least 2).
Table parse_counts_csv(std::istream& in, const FactorSpace* space = nullptr);
Table load_counts_csv(const std::string& path, const FactorSpace* space = nullptr);
void write_counts_csv(std::ostream& out, const Table& counts);

struct EstimateRow {
    std::size_t coordinate = 0;
    std::string effect;
    std::string margin;
    std::string levels;
    double estimate = 0.0;
    double se = 0.0;
    bool constrained = false;
};

std::vector<EstimateRow> estimate_rows(const FitResult& fit, const ModelSpec& spec);
void write_estimates_csv(std::ostream& out, const std::vector<EstimateRow>& rows);
std::vector<EstimateRow> read_estimates_csv(std::istream& in);
/// One block per term: level combination, estimate and s.e. with 4 decimals.
std::string format_estimates_text(const std::vector<EstimateRow>& rows);

void write_summary_csv(std::ostream& out, const FitResult& fit);
std::string format_summary_text(const FitResult& fit);

void write_mediation_csv(std::ostream& out, const MediationResult& m);
/// Dir./Ind./Total rows by transition columns.
std::string format_mediation_text(const MediationResult& m);

}  // namespace mll
