def solution(table_data):
    """Find the day with the most snow."""
    snow = get_column_by_name(table_data, "Snowfall")
    best = argmax(snow)
    days = get_column_by_name(table_data, "Day")
    day = get_column_cell_value(days, best)
    return day
