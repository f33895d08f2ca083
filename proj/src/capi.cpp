extern "C" int vil_abi_version(void) { return 1; }
