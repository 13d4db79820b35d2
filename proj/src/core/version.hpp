#pragma once

#define TVEF_VERSION_STRING "0.1.0"
