from django.dispatch import Signal

# sent whenever a scenario check or a suite instance fails, with
# the check `label` and its serialised `witness`.
check_failed = Signal()
