from django.dispatch import Signal

trial_completed = Signal()
aggregate_completed = Signal()
check_completed = Signal()
