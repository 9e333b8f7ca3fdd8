def solution(table_data):
    return 42
