def test_imports():
    import arbor.arborescence
    import arbor.chain
    import arbor.chainfile
    import arbor.cli
    import arbor.config
    import arbor.ensemble
    import arbor.kernels
    import arbor.replication
    import arbor.rng
    import arbor.sampler
    import arbor.samplers.general
    import arbor.samplers.restricted
    import arbor.stats
    import arbor.verification
