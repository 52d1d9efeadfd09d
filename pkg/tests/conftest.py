from hypothesis import settings

settings.register_profile("repeatable", derandomize=True, max_examples=80)
settings.load_profile("repeatable")
