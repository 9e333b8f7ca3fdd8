def solution(table_data):
    scores = get_column_by_name(table_data, 'F1')
    mean = average(scores)
    ok = greater_than(mean, 75.5)
    return ok
