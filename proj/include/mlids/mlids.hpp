#pragma once

// Umbrella header.

#include "mlids/aho_corasick.hpp"
#include "mlids/alert_store.hpp"
#include "mlids/baseline.hpp"
#include "mlids/common.hpp"
#include "mlids/config.hpp"
#include "mlids/engine.hpp"
#include "mlids/matcher.hpp"
#include "mlids/packets.hpp"
#include "mlids/partitioner.hpp"
#include "mlids/pcap.hpp"
#include "mlids/report.hpp"
#include "mlids/rng.hpp"
#include "mlids/rules.hpp"
#include "mlids/trafficgen.hpp"
#include "mlids/update_agent.hpp"
