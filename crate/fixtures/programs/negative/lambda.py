def solution(table_data):
    f = lambda x: x + 1
    return f
