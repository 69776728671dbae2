#include "mixedweak/cli.hpp"

int main(int argc, char** argv) { return mw::run_main(argc, argv); }
