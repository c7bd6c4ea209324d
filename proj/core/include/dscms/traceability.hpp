#pragma once

#include "dscms/argument_model.hpp"
#include "dscms/spi_catalog.hpp"

#include <vector>

namespace dscms {

/// Cross-checks a case against an indicator catalog. Warning codes:
/// `dangling-spi-claim` (catalog names a claim absent from the case),
/// `attachment-mismatch` (catalog claim differs from the case attachment),
/// `unattached-spi` (catalog indicator with no attachment in the case),
/// `unknown-attached-spi` (case attaches an indicator the catalog lacks),
/// `untraced-leaf` (leaf claim with neither indicator nor supporting evidence).
[[nodiscard]] std::vector<Violation> validate_traceability(const SafetyCase& safety_case, const SpiCatalog& catalog);

}  // namespace dscms
