# scripts/topology
# Topologisk analys av spatiala filter: punktmoln, densitetsfiltrering,
# Mapper, Rips-persistens, filterbanker, syntetiska moln, filformat och export.
