#pragma once

#include <span>
#include <string>

#include "transrate/rankeval.hpp"
#include "transrate/transrate.hpp"

namespace transrate {

/// 17 significant digits: enough to round-trip any binary64 value.
std::string format_double(double v);

/// "method,score" header plus one line per score.
std::string scores_csv(std::span<const TransferScore> scores);
std::string scores_json(std::span<const TransferScore> scores);

/// "method,rank,model,score".
std::string rankings_csv(std::span<const Ranking> rankings);
std::string rankings_json(std::span<const Ranking> rankings);

/// "method,count,pearson,kendall_tau,weighted_tau".
std::string correlations_csv(std::span<const CorrelationReport> reports);
std::string correlations_json(std::span<const CorrelationReport> reports);

}  // namespace transrate
