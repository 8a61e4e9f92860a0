#pragma once

namespace qderk {
struct ButcherTableau;
}
