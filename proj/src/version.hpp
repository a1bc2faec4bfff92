#pragma once

#define VIBROSHEET_VERSION "0.1.0"
