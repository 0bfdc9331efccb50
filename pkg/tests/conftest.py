from hypothesis import settings

# fixed example streams keep the suite reproducible run to run
settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")
