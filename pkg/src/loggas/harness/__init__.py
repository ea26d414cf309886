# verification oracles
